#include "hppl/verify/verdict_json.hpp"

namespace hppl {

Json to_json(const DivisionResult& division, const MemoryVerdict& memory) {
  Json exact = Json::array();
  for (const auto& v : division.exact) {
    Json e = Json::object();
    e.set("var", v.var).set("site", v.site).set("verdict", to_string(v.status));
    if (v.status != ExactVerdict::Status::Verified) e.set("reason", v.reason).set("at", v.reason_text);
    exact.push(std::move(e));
  }
  Json mem = Json::object();
  mem.set("verdict", to_string(memory.kind));
  switch (memory.kind) {
    case MemoryVerdict::Kind::Bounded:
      mem.set("bound", memory.bound).set("m", memory.m);
      break;
    case MemoryVerdict::Kind::Unbounded:
      mem.set("witness", memory.witness).set("witness_stmt", memory.witness_stmt);
      break;
    case MemoryVerdict::Kind::Unknown:
      mem.set("detail", memory.detail);
      break;
  }
  Json out = Json::object();
  out.set("exact", std::move(exact)).set("memory", std::move(mem));
  return out;
}

}  // namespace hppl
