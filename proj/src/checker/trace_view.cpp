#include "atx/checker/trace_view.hpp"

#include <map>

namespace atx::checker {

TraceView TraceView::of(const sim::Trace& t) {
  const auto* h = t.header();
  if (!h) throw Error(ErrorCode::InvalidArgument, "trace has no scenario header");
  TraceView v;
  v.scenario = sim::scenario_from_json(*h);
  v.seed = h->value("seed", std::uint64_t{0});
  v.protocol = h->value("protocol", std::string{});
  for (const auto& [p, _] : v.scenario.faults.byzantine) v.byzantine.insert(p);
  for (const auto& r : t.records()) {
    if (r.kind == "crash") v.crashed.insert(pid(r.node));
    if (r.kind == "end") {
      v.quiescent = r.data.value("quiescent", r.data.value("all_finished", false));
      v.step_bound_hit = r.data.value("step_bound_hit", false);
    }
  }
  return v;
}

std::vector<TracedOp> traced_ops(const sim::Trace& t) {
  std::vector<TracedOp> ops;
  std::map<std::uint64_t, std::size_t> index;
  for (const auto& r : t.records()) {
    if (!r.data.is_object() || !r.data.contains("op_id")) continue;
    const auto id = r.data.at("op_id").get<std::uint64_t>();
    if (r.kind == "invoke") {
      TracedOp op;
      op.process = pid(r.node);
      op.op = sim::operation_from_json(r.data.at("op"));
      op.invoke = r.step;
      op.op_id = id;
      index[id] = ops.size();
      ops.push_back(std::move(op));
      continue;
    }
    auto it = index.find(id);
    if (it == index.end()) continue;
    auto& op = ops[it->second];
    if (r.kind == "respond") {
      op.response = sim::response_from_json(r.data.at("response"));
      op.respond = r.step;
    } else if (r.kind == "effect" && op.effect == kNever) {
      op.effect = r.step;
    }
  }
  return ops;
}

History history_of(const sim::Trace& t) {
  History h;
  for (auto& op : traced_ops(t)) h.ops.push_back(op);
  return h;
}

}  // namespace atx::checker
