#include "deckgen/model.hpp"

#include <random>

namespace deckgen {

void GenerationConfig::check() const {
  if (max_slides_per_section == 0 || max_objects_per_slide == 0 || par_max_len == 0)
    throw SchemaViolation("generation config: budgets must be >= 1");
  auto in_unit = [](double t) { return t >= 0.0 && t <= 1.0; };
  if (!in_unit(theta_R) || !in_unit(theta_A))
    throw SchemaViolation("generation config: thresholds must lie in [0, 1]");
  if (!(gamma >= 0.0)) throw SchemaViolation("generation config: gamma must be >= 0");
  template_spec.check();
}

namespace {

Vec to_vec(const Tensor& t) { return t.data; }

GruParams gru_block(const WeightBundle& b, const std::string& prefix) {
  GruParams p;
  p.wz = b.get(prefix + ".Wz");
  p.wr = b.get(prefix + ".Wr");
  p.wh = b.get(prefix + ".Wh");
  p.uz = b.get(prefix + ".Uz");
  p.ur = b.get(prefix + ".Ur");
  p.uh = b.get(prefix + ".Uh");
  p.bz = to_vec(b.get(prefix + ".bz"));
  p.br = to_vec(b.get(prefix + ".br"));
  p.bh = to_vec(b.get(prefix + ".bh"));
  return p;
}

Mlp2Params mlp_block(const WeightBundle& b, const std::string& prefix) {
  Mlp2Params p;
  p.w1 = b.get(prefix + ".W1");
  p.b1 = to_vec(b.get(prefix + ".b1"));
  p.w2 = b.get(prefix + ".W2");
  p.b2 = to_vec(b.get(prefix + ".b2"));
  return p;
}

}  // namespace

ModelWeights ModelWeights::from_bundle(const WeightBundle& bundle) {
  bundle.validate();
  ModelWeights w;
  w.config = bundle.config();
  w.reader_fwd = gru_block(bundle, "dr.bigru.fwd");
  w.reader_bwd = gru_block(bundle, "dr.bigru.bwd");
  w.text_proj = mlp_block(bundle, "dr.mlp_txt");
  w.figure_proj = mlp_block(bundle, "dr.mlp_fig");
  w.sec_init_w = bundle.get("pt_sec.init.W");
  w.sec_init_b = to_vec(bundle.get("pt_sec.init.b"));
  w.sec_gru = gru_block(bundle, "pt_sec.gru");
  w.slide_gru = gru_block(bundle, "pt_slide.gru");
  w.slide_attn = bundle.get("pt_slide.attn_W");
  w.slide_head = mlp_block(bundle, "pt_slide.head");
  w.obj_gru = gru_block(bundle, "pt_obj.gru");
  w.obj_attn = bundle.get("pt_obj.attn_W");
  w.obj_head = mlp_block(bundle, "pt_obj.head");
  w.layout_head = mlp_block(bundle, "layout.head");
  w.relevance_head = mlp_block(bundle, "delta");
  w.par_embed = bundle.get("par.embed.E");
  w.par_enc = gru_block(bundle, "par.enc.gru");
  w.par_bridge_w = bundle.get("par.bridge.W");
  w.par_bridge_b = to_vec(bundle.get("par.bridge.b"));
  w.par_dec = gru_block(bundle, "par.dec.gru");
  w.par_attn = bundle.get("par.attn_W");
  w.par_gen_w = bundle.get("par.gen.W");
  w.par_gen_b = to_vec(bundle.get("par.gen.b"));
  w.par_gate_w = bundle.get("par.gate.w");
  w.par_gate_b = to_vec(bundle.get("par.gate.b"));
  return w;
}

WeightBundle init_weights(const ModelConfig& config, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  // 53-bit mantissa draw, scaled into [-0.1, 0.1); identical on every platform
  auto draw = [&gen] {
    const double u = static_cast<double>(gen() >> 11) * 0x1p-53;
    return u * 0.2 - 0.1;
  };
  WeightBundle bundle(config);
  for (const auto& spec : parameter_registry(config)) {
    Tensor t = Tensor::zeros(spec.dims);
    for (double& v : t.data) v = draw();
    bundle.put(spec.name, std::move(t));
  }
  return bundle;
}

}  // namespace deckgen
