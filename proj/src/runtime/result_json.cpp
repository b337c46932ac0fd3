#include "hppl/runtime/result_json.hpp"

namespace hppl {

Json to_json(const InferenceResult& r) {
  Json posterior = Json::array();
  for (const auto& c : r.posterior) {
    Json e = Json::object();
    e.set("weight", c.weight);
    switch (c.kind) {
      case PosteriorComponent::Kind::Gaussian:
        e.set("mean", c.mean).set("variance", c.variance);
        break;
      case PosteriorComponent::Kind::Value:
        e.set("value", c.mean);
        break;
      case PosteriorComponent::Kind::Bernoulli:
        e.set("prob", c.mean);
        break;
    }
    posterior.push(std::move(e));
  }
  Json sampled = Json::array();
  for (const auto& s : r.diagnostics.sampled_vars) {
    sampled.push(Json::object().set("var", s.name).set("stmt", s.stmt).set("iteration", s.iteration));
  }
  Json trace = Json::array();
  for (std::size_t v : r.diagnostics.live_trace) trace.push(static_cast<unsigned long long>(v));
  Json diag = Json::object();
  diag.set("sampled_vars", std::move(sampled));
  diag.set("peak_live", static_cast<unsigned long long>(r.diagnostics.peak_live));
  diag.set("live_trace", std::move(trace));
  Json out = Json::object();
  out.set("posterior", std::move(posterior));
  out.set("mean", r.mean());
  out.set("variance", r.variance());
  out.set("log_evidence", r.log_evidence);
  out.set("diagnostics", std::move(diag));
  return out;
}

Json to_json(const OracleResult& r) {
  Json posterior = Json::array();
  for (const auto& c : r.mixture) {
    Json choices = Json::array();
    for (int v : c.choices) choices.push(v);
    posterior.push(Json::object()
                       .set("weight", c.weight)
                       .set("mean", c.mean)
                       .set("variance", c.variance)
                       .set("choices", std::move(choices)));
  }
  Json out = Json::object();
  out.set("posterior", std::move(posterior));
  out.set("mean", r.mean());
  out.set("variance", r.variance());
  out.set("log_evidence", r.log_evidence);
  return out;
}

}  // namespace hppl
