#include "deckgen/model.hpp"
#include "json_util.hpp"

namespace deckgen {

using detail::bbox_to_json;
using detail::ojson;
using detail::parse_bbox;
using detail::parse_text;
using detail::require;
using detail::require_array;
using detail::require_index;
using detail::require_number;
using detail::require_string;

namespace {

ojson decisions_to_json(const std::vector<DecisionTrace>& decisions) {
  ojson arr = ojson::array();
  for (const auto& d : decisions) arr.push_back({{"advance", d.advance}, {"p_advance", d.p_advance}});
  return arr;
}

std::vector<DecisionTrace> decisions_from_json(const detail::json& v, const std::string& where) {
  std::vector<DecisionTrace> out;
  for (const auto& e : v) {
    DecisionTrace d;
    const auto& flag = require(e, "advance", where);
    if (!flag.is_boolean()) throw SchemaViolation(where + ": field 'advance' must be a boolean");
    d.advance = flag.get<bool>();
    d.p_advance = require_number(e, "p_advance", where);
    out.push_back(d);
  }
  return out;
}

std::vector<double> numbers_from_json(const detail::json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaViolation(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw SchemaViolation(where + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

std::string trace_to_json(const GenerationTrace& trace) {
  ojson root;
  ojson secs = ojson::array();
  for (const auto& decisions : trace.section_decisions)
    secs.push_back({{"decisions", decisions_to_json(decisions)}});
  root["sections"] = std::move(secs);

  ojson slides = ojson::array();
  for (const auto& s : trace.slides) {
    ojson js;
    js["section"] = s.section;
    js["decisions"] = decisions_to_json(s.decisions);
    ojson objs = ojson::array();
    for (const auto& o : s.objects) {
      ojson jo;
      jo["kind"] = o.is_figure ? "figure" : "text";
      jo["selection"] = o.selection;
      jo["source_id"] = o.source_id;
      jo["bbox"] = bbox_to_json(o.bbox);
      jo["attention"] = o.attention;
      if (!o.is_figure) {
        jo["tokens"] = o.tokens;
        jo["token_probs"] = o.token_probs;
      }
      objs.push_back(std::move(jo));
    }
    js["objects"] = std::move(objs);
    slides.push_back(std::move(js));
  }
  root["slides"] = std::move(slides);

  root["figure_order"] = trace.figure_order;
  root["relevance"] = trace.relevance;

  ojson removed = ojson::array();
  for (const auto& r : trace.removed)
    removed.push_back({{"slide", r.slide}, {"figure_id", r.figure_id}});
  ojson added = ojson::array();
  for (const auto& a : trace.added)
    added.push_back({{"slide", a.slide}, {"figure_id", a.figure_id}, {"bbox", bbox_to_json(a.bbox)}});
  root["post"] = ojson{{"removed", std::move(removed)}, {"added", std::move(added)}};
  return root.dump(2) + "\n";
}

GenerationTrace trace_from_json(const std::string& text, const std::string& where) {
  const auto j = parse_text(text, where);
  GenerationTrace trace;
  for (const auto& s : require_array(j, "sections", where)) {
    const auto& d = require_array(s, "decisions", where + ".sections");
    trace.section_decisions.push_back(decisions_from_json(d, where + ".sections"));
  }
  std::size_t jn = 0;
  for (const auto& s : require_array(j, "slides", where)) {
    const std::string at = where + ".slides[" + std::to_string(jn++) + "]";
    SlideDecodeTrace st;
    st.section = require_index(s, "section", at);
    st.decisions = decisions_from_json(require_array(s, "decisions", at), at);
    for (const auto& o : require_array(s, "objects", at)) {
      ObjectDecodeTrace ot;
      const std::string kind = require_string(o, "kind", at);
      if (kind != "text" && kind != "figure")
        throw SchemaViolation(at + ": object kind must be \"text\" or \"figure\"");
      ot.is_figure = kind == "figure";
      ot.selection = require_index(o, "selection", at);
      ot.source_id = require_string(o, "source_id", at);
      ot.bbox = parse_bbox(require(o, "bbox", at), at);
      ot.attention = numbers_from_json(require_array(o, "attention", at), at);
      if (!ot.is_figure) {
        for (const auto& t : require_array(o, "tokens", at)) {
          if (!t.is_number_unsigned())
            throw SchemaViolation(at + ": token ids must be non-negative integers");
          ot.tokens.push_back(t.get<std::size_t>());
        }
        ot.token_probs = numbers_from_json(require_array(o, "token_probs", at), at);
      }
      st.objects.push_back(std::move(ot));
    }
    trace.slides.push_back(std::move(st));
  }
  for (const auto& f : require_array(j, "figure_order", where)) {
    if (!f.is_string()) throw SchemaViolation(where + ": figure_order entries must be strings");
    trace.figure_order.push_back(f.get<std::string>());
  }
  for (const auto& row : require_array(j, "relevance", where))
    trace.relevance.push_back(numbers_from_json(row, where + ".relevance"));
  const auto& post = require(j, "post", where);
  for (const auto& r : require_array(post, "removed", where + ".post")) {
    PostRemoval pr;
    pr.slide = require_index(r, "slide", where + ".post.removed");
    pr.figure_id = require_string(r, "figure_id", where + ".post.removed");
    trace.removed.push_back(std::move(pr));
  }
  for (const auto& a : require_array(post, "added", where + ".post")) {
    PostAddition pa;
    pa.slide = require_index(a, "slide", where + ".post.added");
    pa.figure_id = require_string(a, "figure_id", where + ".post.added");
    pa.bbox = parse_bbox(require(a, "bbox", where + ".post.added"), where + ".post.added");
    trace.added.push_back(std::move(pa));
  }
  return trace;
}

void save_trace(const GenerationTrace& trace, const std::string& path) {
  detail::write_text_file(path, trace_to_json(trace));
}

GenerationTrace load_trace(const std::string& path) {
  return trace_from_json(detail::slurp_file(path), "'" + path + "'");
}

std::string loss_to_json(const LossReport& report) {
  ojson root;
  root["structure_loss"] = report.structure_loss;
  root["selection_loss"] = report.selection_loss;
  root["paraphrase_loss"] = report.paraphrase_loss;
  root["matching_loss"] = report.matching_loss;
  root["layout_loss"] = report.layout_loss;
  root["content_loss"] = report.content_loss;
  root["total"] = report.total;
  return root.dump(2) + "\n";
}

}  // namespace deckgen
