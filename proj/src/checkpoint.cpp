#include "auvid/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "auvid/dataset_io.hpp"

namespace auvid::ckpt {

using nlohmann::json;

namespace {

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd json_vec(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json bound_json(const Output& v) {
  json a = json::array();
  for (int i = 0; i < kOutputDim; ++i) {
    if (std::isfinite(v[i])) a.push_back(v[i]);
    else a.push_back(nullptr);
  }
  return a;
}

Output json_bound(const json& a, double inf) {
  Output v;
  for (int i = 0; i < kOutputDim; ++i) v[i] = a.at(i).is_null() ? inf : a.at(i).get<double>();
  return v;
}

}  // namespace

std::string to_json(const Checkpoint& c) {
  const auto& m = c.model;
  json j;
  j["format"] = "auvid-checkpoint";
  j["version"] = kFormatVersion;
  j["variant"] = m.variant.name();
  j["seed"] = c.seed;
  j["init_seed"] = std::to_string(c.init_seed);
  j["config_hash"] = c.config_hash;
  j["diverged"] = c.diverged;
  j["diverged_at"] = c.diverged_at;
  if (m.mlp) {
    j["mlp"] = {{"dims", m.mlp->dims()}, {"activation", "tanh"}, {"params", vec_json(m.mlp->params())}};
  } else {
    j["mlp"] = nullptr;
  }
  if (m.gray) {
    j["graybox"] = {{"mu", vec_json(m.gray->mu)}, {"K", vec_json(m.gray->K)}};
  } else {
    j["graybox"] = nullptr;
  }
  if (m.bounds) {
    j["spectral_bounds"] = {{"sigma_min", m.bounds->sigma_min}, {"sigma_max", m.bounds->sigma_max}};
  } else {
    j["spectral_bounds"] = nullptr;
  }
  if (m.constraint) {
    j["penalty"] = {{"weight", m.constraint->weight},
                    {"lower", bound_json(m.constraint->lower)},
                    {"upper", bound_json(m.constraint->upper)}};
  } else {
    j["penalty"] = nullptr;
  }
  const auto& o = c.optimizer;
  j["optimizer"] = {{"step", o.step},           {"lr", o.cfg.lr},
                    {"beta1", o.cfg.beta1},     {"beta2", o.cfg.beta2},
                    {"eps", o.cfg.eps},         {"weight_decay", o.cfg.weight_decay},
                    {"m", vec_json(o.m)},       {"v", vec_json(o.v)}};
  return j.dump(1);
}

Checkpoint from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  if (j.value("format", "") != "auvid-checkpoint") throw std::runtime_error("checkpoint: wrong format tag");
  if (j.at("version").get<int>() != kFormatVersion) throw std::runtime_error("checkpoint: unsupported version");
  Checkpoint c;
  auto& m = c.model;
  try {
    m.variant = models::Variant::parse(j.at("variant").get<std::string>());
    c.seed = j.at("seed").get<int>();
    c.init_seed = std::stoull(j.at("init_seed").get<std::string>());
    c.config_hash = j.at("config_hash").get<std::string>();
    c.diverged = j.at("diverged").get<bool>();
    c.diverged_at = j.at("diverged_at").get<std::string>();
    if (!j.at("mlp").is_null()) {
      const auto& jm = j["mlp"];
      if (jm.at("activation").get<std::string>() != "tanh") throw std::runtime_error("unsupported activation");
      nn::Mlp net(jm.at("dims").get<std::vector<int>>());
      const auto p = json_vec(jm.at("params"));
      if (p.size() != net.params().size()) throw std::runtime_error("parameter count mismatch");
      net.params() = p;
      m.mlp = std::move(net);
    }
    if (!j.at("graybox").is_null()) {
      models::GrayboxParams g;
      g.mu = json_vec(j["graybox"].at("mu"));
      g.K = json_vec(j["graybox"].at("K"));
      m.gray = g;
    }
    if (!j.at("spectral_bounds").is_null()) {
      m.bounds = nn::SpectralBounds{j["spectral_bounds"].at("sigma_min").get<double>(),
                                    j["spectral_bounds"].at("sigma_max").get<double>()};
    }
    if (!j.at("penalty").is_null()) {
      constexpr double inf = std::numeric_limits<double>::infinity();
      models::ConstraintSpec s;
      s.weight = j["penalty"].at("weight").get<double>();
      s.lower = json_bound(j["penalty"].at("lower"), -inf);
      s.upper = json_bound(j["penalty"].at("upper"), inf);
      m.constraint = s;
    }
    const auto& o = j.at("optimizer");
    c.optimizer.step = o.at("step").get<long long>();
    c.optimizer.cfg.lr = o.at("lr").get<double>();
    c.optimizer.cfg.beta1 = o.at("beta1").get<double>();
    c.optimizer.cfg.beta2 = o.at("beta2").get<double>();
    c.optimizer.cfg.eps = o.at("eps").get<double>();
    c.optimizer.cfg.weight_decay = o.at("weight_decay").get<double>();
    c.optimizer.m = json_vec(o.at("m"));
    c.optimizer.v = json_vec(o.at("v"));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: ") + e.what());
  }
  if (m.variant.has_mlp() != m.mlp.has_value() || m.variant.has_graybox() != m.gray.has_value()) {
    throw std::runtime_error("checkpoint: components do not match variant " + m.variant.name());
  }
  return c;
}

void save(const Checkpoint& c, const std::filesystem::path& file) { io::atomic_write(file, to_json(c)); }

Checkpoint load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open checkpoint " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return from_json(s.str());
}

}  // namespace auvid::ckpt
