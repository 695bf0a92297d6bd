#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace atx::bcast {

using Digest = std::uint64_t;

// FNV-1a, 64 bit.
Digest digest(std::string_view bytes);

struct Signature {
  int signer = 0;
  std::uint64_t tag = 0;

  auto operator<=>(const Signature&) const = default;
};

// Who may produce a tag for a given signer is the authenticator's business;
// verification is public.
class Authenticator {
 public:
  virtual ~Authenticator() = default;
  virtual Signature sign(int signer, std::string_view bytes) const = 0;
  virtual bool verify(const Signature& sig, std::string_view bytes) const = 0;
};

// Simulation-grade scheme: per-signer secrets held by the trusted network
// layer; a tag is a keyed hash of the message.
class StubAuthenticator final : public Authenticator {
 public:
  StubAuthenticator(int signers, std::uint64_t seed = 0x5eed);

  Signature sign(int signer, std::string_view bytes) const override;
  bool verify(const Signature& sig, std::string_view bytes) const override;

 private:
  std::uint64_t tag(int signer, std::string_view bytes) const;
  std::vector<std::uint64_t> secrets_;  // index 0 is the sequencing service
};

// The only signing handle a process gets: its own identity.
class Signer {
 public:
  Signer(const Authenticator& auth, int id) : auth_(&auth), id_(id) {}
  Signature sign(std::string_view bytes) const { return auth_->sign(id_, bytes); }
  int id() const { return id_; }
  const Authenticator& authenticator() const { return *auth_; }

 private:
  const Authenticator* auth_;
  int id_;
};

}  // namespace atx::bcast
