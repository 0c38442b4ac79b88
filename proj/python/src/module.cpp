// Python bindings. Structured values cross the boundary as JSON text and are
// decoded on the Python side, so the wrappers here stay thin.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "toxlabel/annotator.h"
#include "toxlabel/cli.h"
#include "toxlabel/error.h"
#include "toxlabel/ingest.h"
#include "toxlabel/metrics.h"
#include "toxlabel/parse.h"
#include "toxlabel/prompting.h"
#include "toxlabel/sampler.h"
#include "toxlabel/softprompt.h"
#include "toxlabel/transfer.h"

namespace py = pybind11;
using namespace toxlabel;

namespace {

template <class T>
std::vector<T> from_json_lines(const std::string& text, T (*decode)(const nlohmann::json&)) {
  std::vector<T> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(decode(nlohmann::json::parse(line)));
  }
  return out;
}

std::string transfer(const std::string& records_jsonl, const std::string& responses_jsonl) {
  std::istringstream rin(records_jsonl), ain(responses_jsonl);
  const auto records = read_records_jsonl(rin);
  const auto responses = read_responses_jsonl(ain);
  const auto partition = apply_agreement_filter(records, outcomes_from_responses(responses));
  std::ostringstream kept, discarded;
  emit_unified(partition.kept, kept);
  emit_discards(partition.discarded, discarded);
  nlohmann::ordered_json j;
  j["unified"] = kept.str();
  j["discards"] = discarded.str();
  j["stats"] = stats_to_json(compute_source_stats(partition));
  return j.dump();
}

std::string cost(const std::string& records_jsonl) {
  std::istringstream in(records_jsonl);
  const auto est = estimate_cost(read_records_jsonl(in), {}, PricingConfig{});
  auto line = [](const CostLine& c) {
    return nlohmann::ordered_json{{"records", c.records},
                                  {"input_tokens", c.input_tokens},
                                  {"output_tokens", c.output_tokens},
                                  {"cost_usd", c.cost}};
  };
  nlohmann::ordered_json j;
  j["total"] = line(est.total);
  j["per_source"] = nlohmann::ordered_json::object();
  for (const auto& [name, c] : est.per_source) j["per_source"][name] = line(c);
  return j.dump();
}

std::string plan(const std::map<std::string, std::int64_t>& available, std::int64_t base_target) {
  LabelCounts counts{};
  for (const auto& [name, n] : available) {
    bool found = false;
    for (Category c : kAllLabels) {
      if (display_name(c) == name) {
        counts[index_of(c)] = n;
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::kUnknownCategory, name);
  }
  return to_json(plan_quotas(counts, base_target)).dump();
}

std::string sample(const std::string& pool_jsonl, std::int64_t base_target, std::uint64_t seed) {
  const auto pool = from_json_lines<PoolItem>(pool_jsonl, pool_item_from_json);
  const auto drawn = draw_samples(pool, plan_quotas(count_available(pool), base_target), seed);
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& it : drawn.items) items.push_back(to_json(it));
  return items.dump();
}

std::string assemble_one(const std::string& id, const std::vector<std::string>& context, const std::string& line,
                         const std::string& token, std::int64_t max_len, const std::string& placement) {
  const auto t = game_token_from_string(token);
  if (!t) throw Error(ErrorCode::kUnmappedOrigin, token);
  AssembleOptions o;
  o.max_len = max_len;
  o.placement = placement_from_string(placement);
  return to_json(assemble(id, context, line, *t, o)).dump();
}

py::tuple cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"toxlabel"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int status;
  {
    py::gil_scoped_release release;
    status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(status, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "toxlabel core bindings";
  static py::exception<Error> error(m, "ToxlabelError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error.ptr())(e.what());
      PyObject_SetAttrString(exc.ptr(), "code", py::str(std::string(to_string(e.code()))).ptr());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("system_prompt", [](const std::string& v) { return std::string(render_system_prompt(v)); },
        py::arg("version") = "v1");
  m.def("user_message", &render_user_message, py::arg("context"), py::arg("text"));
  m.def("parse_response",
        [](const std::string& id, const std::string& body) { return to_json(parse_response(id, body)).dump(); },
        py::arg("record_id"), py::arg("body_text"));
  m.def("transfer", &transfer, py::arg("records_jsonl"), py::arg("responses_jsonl"));
  m.def("estimate_cost", &cost, py::arg("records_jsonl"));
  m.def(
      "f1_scores",
      [](const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
        return to_json(f1_scores(gold, pred)).dump();
      },
      py::arg("gold"), py::arg("pred"));
  m.def("plan_quotas", &plan, py::arg("available"), py::arg("base_target") = 50);
  m.def("draw_samples", &sample, py::arg("pool_jsonl"), py::arg("base_target") = 50, py::arg("seed") = 0);
  m.def("assemble", &assemble_one, py::arg("id"), py::arg("context"), py::arg("line"), py::arg("token"),
        py::arg("max_len") = kDefaultMaxLength, py::arg("placement") = "before_context");
  m.def("run_cli", &cli, py::arg("args"));
}
