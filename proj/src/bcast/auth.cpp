#include "atx/bcast/auth.hpp"

#include <stdexcept>
#include <string>

namespace atx::bcast {

Digest digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

StubAuthenticator::StubAuthenticator(int signers, std::uint64_t seed) {
  for (int i = 0; i <= signers; ++i)
    secrets_.push_back(splitmix(seed * 1000003ull + static_cast<std::uint64_t>(i)));
}

std::uint64_t StubAuthenticator::tag(int signer, std::string_view bytes) const {
  if (signer < 0 || static_cast<std::size_t>(signer) >= secrets_.size())
    throw std::out_of_range("unknown signer " + std::to_string(signer));
  return splitmix(digest(bytes) ^ secrets_[static_cast<std::size_t>(signer)]);
}

Signature StubAuthenticator::sign(int signer, std::string_view bytes) const {
  return {signer, tag(signer, bytes)};
}

bool StubAuthenticator::verify(const Signature& sig, std::string_view bytes) const {
  if (sig.signer < 0 || static_cast<std::size_t>(sig.signer) >= secrets_.size())
    return false;
  return tag(sig.signer, bytes) == sig.tag;
}

}  // namespace atx::bcast
