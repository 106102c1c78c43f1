#include "auvid/model.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace auvid::models {

Variant Variant::parse(const std::string& text) {
  if (text == "blackbox") return {ModelKind::Blackbox, 0.0};
  if (text == "cblackbox") return {ModelKind::ConstrainedBlackbox, 0.0};
  if (text == "graybox") return {ModelKind::Graybox, 0.0};
  if (text.rfind("hybrid:", 0) == 0) {
    const std::string num = text.substr(7);
    std::size_t pos = 0;
    double e = 0.0;
    try {
      e = std::stod(num, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != num.size() || !(e >= 0.0 && e <= 1.0)) {
      throw ConfigError("bad hybrid error level in variant '" + text + "'");
    }
    return {ModelKind::Hybrid, e};
  }
  throw ConfigError("unknown model variant '" + text + "'");
}

std::vector<Variant> Variant::all() {
  return {{ModelKind::Blackbox, 0.0}, {ModelKind::ConstrainedBlackbox, 0.0}, {ModelKind::Hybrid, 1.0},
          {ModelKind::Hybrid, 0.5},   {ModelKind::Hybrid, 0.3},             {ModelKind::Graybox, 0.0}};
}

std::string Variant::name() const {
  switch (kind) {
    case ModelKind::Blackbox: return "blackbox";
    case ModelKind::ConstrainedBlackbox: return "cblackbox";
    case ModelKind::Graybox: return "graybox";
    case ModelKind::Hybrid: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "hybrid:%.1f", e_mu);
      // Keep more digits when one decimal would lose information.
      if (std::stod(buf + 7) != e_mu) std::snprintf(buf, sizeof buf, "hybrid:%g", e_mu);
      return buf;
    }
  }
  return "?";
}

std::string Variant::slug() const {
  std::string s = name();
  std::replace(s.begin(), s.end(), ':', '-');
  return s;
}

Variant Variant::from_slug(const std::string& slug) {
  std::string s = slug;
  if (s.rfind("hybrid-", 0) == 0) s[6] = ':';
  return parse(s);
}

TrainableModel TrainableModel::make(const Variant& v, const plant::TruthParams& truth, excitation::Rng& rng,
                                    const ModelOptions& opt) {
  TrainableModel m;
  m.variant = v;
  if (v.has_mlp()) {
    m.mlp = nn::Mlp(opt.mlp_dims);
    m.mlp->init_uniform_fan_in(rng);
  }
  switch (v.kind) {
    case ModelKind::Blackbox: break;
    case ModelKind::ConstrainedBlackbox:
      m.bounds = opt.blackbox_bounds;
      m.constraint = ConstraintSpec::defaults(opt.penalty_weight);
      break;
    case ModelKind::Graybox: m.gray = sample_offset_params(truth, opt.graybox_init_e_mu, rng); break;
    case ModelKind::Hybrid:
      m.bounds = opt.hybrid_bounds;
      m.gray = sample_offset_params(truth, v.e_mu, rng);
      break;
  }
  m.project();
  return m;
}

Eigen::Index TrainableModel::n_trainable() const {
  if (variant.kind == ModelKind::Graybox) return 8;
  return mlp ? mlp->params().size() : 0;
}

Eigen::VectorXd TrainableModel::trainable_params() const {
  if (variant.kind == ModelKind::Graybox) return gray->mu;
  return mlp->params();
}

void TrainableModel::set_trainable_params(const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (p.size() != n_trainable()) throw std::invalid_argument("set_trainable_params: size mismatch");
  if (variant.kind == ModelKind::Graybox) gray->mu = p;
  else mlp->params() = p;
}

Output TrainableModel::rhs(const Output& z, const Input& u, Cache* cache) const {
  Output f = Output::Zero();
  if (gray) f += graybox_rhs(*gray, z, u);
  if (mlp) f += nn::mlp_forward(*mlp, z, u, cache ? &cache->mlp : nullptr);
  return f;
}

Output TrainableModel::vjp(const Output& z, const Input& u, const Output& v, const Cache& cache,
                           Eigen::Ref<Eigen::VectorXd> dparams) const {
  Output g = Output::Zero();
  if (gray) {
    MuVec dmu = MuVec::Zero();
    g += graybox_vjp(*gray, z, u, v, dmu);
    if (variant.kind == ModelKind::Graybox) dparams += dmu;
  }
  if (mlp) {
    const Eigen::VectorXd din = nn::mlp_backward(*mlp, cache.mlp, v, dparams);
    g += din.head<kOutputDim>();
  }
  return g;
}

void TrainableModel::project() {
  if (mlp && bounds) nn::project_spectrum(*mlp, *bounds);
}

bool TrainableModel::operator==(const TrainableModel& o) const {
  return variant == o.variant && mlp == o.mlp && gray == o.gray && bounds == o.bounds &&
         constraint.has_value() == o.constraint.has_value();
}

}  // namespace auvid::models
