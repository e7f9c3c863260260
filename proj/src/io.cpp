#include "deckgen/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "json_util.hpp"

namespace deckgen {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// EmbeddingStore
// ---------------------------------------------------------------------------

void EmbeddingStore::add(const std::string& key, Vec value) {
  if (value.size() != dim_)
    throw SchemaViolation("embedding '" + key + "': vector size " + std::to_string(value.size()) +
                          " != store dim " + std::to_string(dim_));
  for (double v : value)
    if (!std::isfinite(v)) throw NonFiniteValue("embedding '" + key + "' contains a non-finite value");
  if (index_.count(key)) throw SchemaViolation("duplicate embedding key '" + key + "'");
  index_[key] = keys_.size();
  keys_.push_back(key);
  values_.push_back(std::move(value));
}

bool EmbeddingStore::contains(const std::string& key) const { return index_.count(key) != 0; }

const Vec& EmbeddingStore::get(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw MissingEmbedding("no embedding for key '" + key + "'");
  return values_[it->second];
}

// ---------------------------------------------------------------------------
// ModelConfig / registry / WeightBundle
// ---------------------------------------------------------------------------

void ModelConfig::check() const {
  if (sentence_dim == 0 || image_dim == 0 || shared_dim == 0 || pt_hidden == 0 || par_hidden == 0)
    throw SchemaViolation("model config: all dimensions must be >= 1");
  if (vocab_size < 4) throw SchemaViolation("model config: vocab_size must cover the reserved tokens");
  if (shared_dim % 2 != 0) throw SchemaViolation("model config: shared_dim must be even");
}

namespace {

void add_gru_specs(std::vector<TensorSpec>& out, const std::string& prefix, std::size_t input,
                   std::size_t hidden) {
  for (const char* g : {"Wz", "Wr", "Wh"}) out.push_back({prefix + "." + g, {hidden, input}});
  for (const char* g : {"Uz", "Ur", "Uh"}) out.push_back({prefix + "." + g, {hidden, hidden}});
  for (const char* g : {"bz", "br", "bh"}) out.push_back({prefix + "." + g, {hidden}});
}

void add_mlp_specs(std::vector<TensorSpec>& out, const std::string& prefix, std::size_t input,
                   std::size_t hidden, std::size_t output) {
  out.push_back({prefix + ".W1", {hidden, input}});
  out.push_back({prefix + ".b1", {hidden}});
  out.push_back({prefix + ".W2", {output, hidden}});
  out.push_back({prefix + ".b2", {output}});
}

}  // namespace

std::vector<TensorSpec> parameter_registry(const ModelConfig& cfg) {
  cfg.check();
  const std::size_t s = cfg.sentence_dim;
  const std::size_t m = cfg.image_dim;
  const std::size_t d = cfg.shared_dim;
  const std::size_t p = cfg.pt_hidden;
  const std::size_t r = cfg.par_hidden;
  const std::size_t v = cfg.vocab_size;

  std::vector<TensorSpec> reg;
  // document reader: Bi-GRU over sentence embeddings, then shared-space MLPs
  add_gru_specs(reg, "dr.bigru.fwd", s, d / 2);
  add_gru_specs(reg, "dr.bigru.bwd", s, d / 2);
  add_mlp_specs(reg, "dr.mlp_txt", d, d, d);
  add_mlp_specs(reg, "dr.mlp_fig", m + s, d, d);
  // section tracker: state bridge from head-tail sentence context, then GRU
  reg.push_back({"pt_sec.init.W", {p, 2 * d}});
  reg.push_back({"pt_sec.init.b", {p}});
  add_gru_specs(reg, "pt_sec.gru", 2 * d, p);
  // slide tracker: GRU input is the previous action one-hot plus the
  // previous attention context
  add_gru_specs(reg, "pt_slide.gru", d + 2, p);
  reg.push_back({"pt_slide.attn_W", {p, d}});
  add_mlp_specs(reg, "pt_slide.head", p + d, p, 2);
  // object tracker, independent weights
  add_gru_specs(reg, "pt_obj.gru", d + 2, p);
  reg.push_back({"pt_obj.attn_W", {p, d}});
  add_mlp_specs(reg, "pt_obj.head", p + d, p, 2);
  // layout regression head
  add_mlp_specs(reg, "layout.head", p + d, p, 4);
  // text-figure relevance head
  add_mlp_specs(reg, "delta", 2 * d, p, 1);
  // paraphraser
  reg.push_back({"par.embed.E", {v, r}});
  add_gru_specs(reg, "par.enc.gru", r, r);
  reg.push_back({"par.bridge.W", {r, r + p}});
  reg.push_back({"par.bridge.b", {r}});
  add_gru_specs(reg, "par.dec.gru", 2 * r, r);
  reg.push_back({"par.attn_W", {r, r}});
  reg.push_back({"par.gen.W", {v, 2 * r}});
  reg.push_back({"par.gen.b", {v}});
  reg.push_back({"par.gate.w", {1, 2 * r}});
  reg.push_back({"par.gate.b", {1}});
  return reg;
}

void WeightBundle::put(const std::string& name, Tensor t) {
  if (tensors_.count(name)) throw SchemaViolation("duplicate tensor '" + name + "'");
  names_.push_back(name);
  tensors_.emplace(name, std::move(t));
}

bool WeightBundle::contains(const std::string& name) const { return tensors_.count(name) != 0; }

const Tensor& WeightBundle::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw MissingTensor("no tensor named '" + name + "'");
  return it->second;
}

void WeightBundle::validate() const {
  const auto registry = parameter_registry(config_);
  for (const auto& spec : registry) {
    auto it = tensors_.find(spec.name);
    if (it == tensors_.end()) throw MissingTensor("missing tensor '" + spec.name + "'");
    if (it->second.dims != spec.dims) {
      auto fmt = [](const std::vector<std::size_t>& d) {
        std::string s = "(";
        for (std::size_t i = 0; i < d.size(); ++i) s += (i ? ", " : "") + std::to_string(d[i]);
        return s + ")";
      };
      throw ShapeMismatch("tensor '" + spec.name + "': expected dims " + fmt(spec.dims) +
                          ", got " + fmt(it->second.dims));
    }
    if (!it->second.all_finite())
      throw NonFiniteValue("tensor '" + spec.name + "' contains a non-finite value");
  }
  if (tensors_.size() != registry.size()) {
    for (const auto& name : names_) {
      bool known = false;
      for (const auto& spec : registry)
        if (spec.name == name) { known = true; break; }
      if (!known) throw SchemaViolation("unexpected tensor '" + name + "' in weight bundle");
    }
  }
}

using detail::parse_bbox;
using detail::parse_file;
using detail::require;
using detail::require_array;
using detail::require_number;
using detail::require_string;
using detail::write_text_file;

// ---------------------------------------------------------------------------
// Document JSON
// ---------------------------------------------------------------------------

Document load_document(const std::string& path) {
  const json j = parse_file(path);
  Document doc;
  doc.id = require_string(j, "id", path);
  const json& sections = require_array(j, "sections", path);
  for (std::size_t si = 0; si < sections.size(); ++si) {
    const std::string where = path + " sections[" + std::to_string(si) + "]";
    Section sec;
    sec.title = require_string(sections[si], "title", where);
    const json& sents = require_array(sections[si], "sentences", where);
    for (std::size_t k = 0; k < sents.size(); ++k) {
      const std::string swhere = where + ".sentences[" + std::to_string(k) + "]";
      Sentence s;
      s.id = require_string(sents[k], "id", swhere);
      s.text = require_string(sents[k], "text", swhere);
      sec.sentences.push_back(std::move(s));
    }
    doc.sections.push_back(std::move(sec));
  }
  const json& figures = require_array(j, "figures", path);
  for (std::size_t q = 0; q < figures.size(); ++q) {
    const std::string where = path + " figures[" + std::to_string(q) + "]";
    FigureRef f;
    f.id = require_string(figures[q], "id", where);
    f.caption = require_string(figures[q], "caption", where);
    f.aspect_ratio = require_number(figures[q], "aspect_ratio", where);
    doc.figures.push_back(std::move(f));
  }
  validate_document(doc);
  return doc;
}

void save_document(const Document& doc, const std::string& path) {
  ojson j;
  j["id"] = doc.id;
  j["sections"] = ojson::array();
  for (const auto& sec : doc.sections) {
    ojson js;
    js["title"] = sec.title;
    js["sentences"] = ojson::array();
    for (const auto& s : sec.sentences) js["sentences"].push_back({{"id", s.id}, {"text", s.text}});
    j["sections"].push_back(std::move(js));
  }
  j["figures"] = ojson::array();
  for (const auto& f : doc.figures)
    j["figures"].push_back({{"id", f.id}, {"caption", f.caption}, {"aspect_ratio", f.aspect_ratio}});
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Deck JSON
// ---------------------------------------------------------------------------

SlideDeck load_deck(const std::string& path) {
  const json j = parse_file(path);
  SlideDeck deck;
  deck.id = require_string(j, "id", path);
  const json& slides = require_array(j, "slides", path);
  for (std::size_t i = 0; i < slides.size(); ++i) {
    const std::string where = path + " slides[" + std::to_string(i) + "]";
    Slide slide;
    if (slides[i].contains("title")) {
      if (!slides[i].at("title").is_string())
        throw SchemaViolation(where + ": field 'title' must be a string");
      slide.title = slides[i].at("title").get<std::string>();
    }
    const json& objects = require_array(slides[i], "objects", where);
    for (std::size_t k = 0; k < objects.size(); ++k) {
      const std::string owhere = where + ".objects[" + std::to_string(k) + "]";
      const std::string kind = require_string(objects[k], "kind", owhere);
      if (kind == "text") {
        TextObject t;
        if (objects[k].contains("id")) {
          if (!objects[k].at("id").is_string())
            throw SchemaViolation(owhere + ": field 'id' must be a string");
          t.id = objects[k].at("id").get<std::string>();
        }
        t.text = require_string(objects[k], "text", owhere);
        t.bbox = parse_bbox(require(objects[k], "bbox", owhere), owhere);
        slide.objects.emplace_back(std::move(t));
      } else if (kind == "figure") {
        FigureObject f;
        f.figure_id = require_string(objects[k], "figure_id", owhere);
        f.bbox = parse_bbox(require(objects[k], "bbox", owhere), owhere);
        slide.objects.emplace_back(std::move(f));
      } else {
        throw SchemaViolation(owhere + ": unknown object kind '" + kind + "'");
      }
    }
    deck.slides.push_back(std::move(slide));
  }
  validate_deck(deck);
  return deck;
}

std::string deck_to_json(const SlideDeck& deck) {
  ojson j;
  j["id"] = deck.id;
  j["slides"] = ojson::array();
  for (const auto& slide : deck.slides) {
    ojson js;
    if (slide.title) js["title"] = *slide.title;
    js["objects"] = ojson::array();
    for (const auto& o : slide.objects) {
      ojson jo;
      if (is_text(o)) {
        const auto& t = as_text(o);
        jo["kind"] = "text";
        if (t.id) jo["id"] = *t.id;
        jo["text"] = t.text;
        jo["bbox"] = {t.bbox.x, t.bbox.y, t.bbox.w, t.bbox.h};
      } else {
        const auto& f = as_figure(o);
        jo["kind"] = "figure";
        jo["figure_id"] = f.figure_id;
        jo["bbox"] = {f.bbox.x, f.bbox.y, f.bbox.w, f.bbox.h};
      }
      js["objects"].push_back(std::move(jo));
    }
    j["slides"].push_back(std::move(js));
  }
  return j.dump(2) + "\n";
}

void save_deck(const SlideDeck& deck, const std::string& path) {
  write_text_file(path, deck_to_json(deck));
}

// ---------------------------------------------------------------------------
// Vocabulary JSON
// ---------------------------------------------------------------------------

Vocabulary load_vocabulary(const std::string& path) {
  const json j = parse_file(path);
  if (!j.is_array()) throw SchemaViolation(path + ": vocabulary must be a JSON array of strings");
  std::vector<std::string> tokens;
  tokens.reserve(j.size());
  for (const auto& t : j) {
    if (!t.is_string()) throw SchemaViolation(path + ": vocabulary entries must be strings");
    tokens.push_back(t.get<std::string>());
  }
  return Vocabulary(std::move(tokens));
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  ojson j = ojson::array();
  for (const auto& t : vocab.tokens()) j.push_back(t);
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// binary primitives (little-endian)
// ---------------------------------------------------------------------------

namespace {

class ByteReader {
public:
  ByteReader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

  void expect_magic(const char* magic) {
    if (data_.size() < 4) throw TruncatedFile("'" + path_ + "': shorter than the magic header");
    if (std::memcmp(data_.data(), magic, 4) != 0)
      throw BadMagic("'" + path_ + "': expected magic '" + magic + "'");
    pos_ = 4;
  }

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint8_t>(data_[pos_]) |
                      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(data_[pos_ + 1])) << 8);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | static_cast<std::uint8_t>(data_[pos_ + i]);
    pos_ += 4;
    return v;
  }

  float f32() {
    std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == data_.size(); }

private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size())
      throw TruncatedFile("'" + path_ + "': truncated at byte " + std::to_string(pos_));
  }

  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

class ByteWriter {
public:
  void magic(const char* m) { out_.append(m, 4); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<char>(v & 0xff));
    out_.push_back(static_cast<char>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    u32(bits);
  }
  void str(const std::string& s) { out_.append(s); }

  void dump(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw WriteFailure("cannot open '" + path + "' for writing");
    out.write(out_.data(), static_cast<std::streamsize>(out_.size()));
    if (!out) throw WriteFailure("write to '" + path + "' failed");
  }

private:
  std::string out_;
};

}  // namespace

// ---------------------------------------------------------------------------
// embedding binary
// ---------------------------------------------------------------------------

EmbeddingStore load_embeddings(const std::string& path) {
  ByteReader r(detail::slurp_file(path), path);
  r.expect_magic("EMB1");
  const std::uint32_t dim = r.u32();
  const std::uint32_t count = r.u32();
  if (dim == 0) throw SchemaViolation("'" + path + "': embedding dim must be >= 1");
  EmbeddingStore store(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t klen = r.u16();
    const std::string key = r.bytes(klen);
    Vec v(dim);
    for (std::uint32_t c = 0; c < dim; ++c) v[c] = static_cast<double>(r.f32());
    for (double x : v)
      if (!std::isfinite(x))
        throw NonFiniteValue("'" + path + "': embedding '" + key + "' contains a non-finite value");
    store.add(key, std::move(v));
  }
  if (!r.at_end()) throw MalformedFile("'" + path + "': trailing bytes after last record");
  return store;
}

void save_embeddings(const EmbeddingStore& store, const std::string& path) {
  ByteWriter w;
  w.magic("EMB1");
  w.u32(static_cast<std::uint32_t>(store.dim()));
  w.u32(static_cast<std::uint32_t>(store.size()));
  for (const auto& key : store.keys()) {
    if (key.size() > 0xffff) throw SchemaViolation("embedding key too long: '" + key + "'");
    w.u16(static_cast<std::uint16_t>(key.size()));
    w.str(key);
    for (double v : store.get(key)) w.f32(static_cast<float>(v));
  }
  w.dump(path);
}

// ---------------------------------------------------------------------------
// weight binary
// ---------------------------------------------------------------------------

WeightBundle load_weights(const std::string& path, const ModelConfig& cfg) {
  ByteReader r(detail::slurp_file(path), path);
  r.expect_magic("W8S1");
  const std::uint32_t count = r.u32();
  WeightBundle bundle(cfg);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t nlen = r.u16();
    const std::string name = r.bytes(nlen);
    const std::uint8_t rank = r.u8();
    std::vector<std::size_t> dims(rank);
    std::size_t numel = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      dims[d] = r.u32();
      numel *= dims[d];
    }
    std::vector<double> data(numel);
    for (std::size_t k = 0; k < numel; ++k) data[k] = static_cast<double>(r.f32());
    bundle.put(name, Tensor(std::move(dims), std::move(data)));
  }
  if (!r.at_end()) throw MalformedFile("'" + path + "': trailing bytes after last tensor");
  bundle.validate();
  return bundle;
}

void save_weights(const WeightBundle& bundle, const std::string& path) {
  ByteWriter w;
  w.magic("W8S1");
  w.u32(static_cast<std::uint32_t>(bundle.names().size()));
  for (const auto& name : bundle.names()) {
    const Tensor& t = bundle.get(name);
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.str(name);
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.dims) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.data) w.f32(static_cast<float>(v));
  }
  w.dump(path);
}

}  // namespace deckgen
