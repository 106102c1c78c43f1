#include "auvid/plant.hpp"

#include <cmath>

#include "auvid/kvconfig.hpp"

namespace auvid {

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

bool input_in_box(const Input& u, double tol) {
  for (int i = 0; i < kInputDim; ++i) {
    if (!(u[i] >= kInputLower[i] - tol && u[i] <= kInputUpper[i] + tol)) return false;
  }
  return true;
}

namespace plant {

Eigen::Matrix<double, 8, 1> TruthParams::mu() const {
  Eigen::Matrix<double, 8, 1> m;
  m << X_uu, k, M_uq, M_q, B_zB, b, N_ur, c;
  return m;
}

TruthParams TruthParams::defaults() {
  TruthParams p;
  p.X_uu = -0.5;
  p.k = 2.0;
  p.M_uq = -0.5;
  p.M_q = -1.5;
  p.B_zB = 3.0;
  p.b = 0.3;
  p.N_ur = -1.0;
  p.c = 0.3;
  p.Z_wabsw = -1.0;
  p.WB = 0.0;
  p.K_du = 10.0;
  p.K_dq = 10.0;
  p.K_dr = 10.0;
  return p;
}

void TruthParams::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(std::string("truth_params.") + key + " must be " + what);
  };
  require(std::isfinite(X_uu) && X_uu < 0.0, "X_uu", "negative");
  require(std::isfinite(Z_wabsw) && Z_wabsw < 0.0, "Z_wabsw", "negative");
  require(std::isfinite(k) && k > 0.0, "k", "positive");
  require(std::isfinite(K_du) && K_du > 0.0, "K_du", "positive (stable lag)");
  require(std::isfinite(K_dq) && K_dq > 0.0, "K_dq", "positive (stable lag)");
  require(std::isfinite(K_dr) && K_dr > 0.0, "K_dr", "positive (stable lag)");
  for (double v : {M_uq, M_q, B_zB, b, N_ur, c, WB}) {
    if (!std::isfinite(v)) throw ConfigError("truth_params contains a non-finite coefficient");
  }
}

State truth_rhs(const State& x, const Input& in, const TruthParams& p) {
  const double th = x[sx::theta];
  const double ps = x[sx::psi];
  const double u = x[sx::u];
  const double w = x[sx::w];
  const double q = x[sx::q];
  const double r = x[sx::r];
  const double cth = std::cos(th);
  const double sth = std::sin(th);
  if (cth <= kCosThetaEps) {
    throw SingularityError("truth_rhs: cos(theta) <= 1e-9 at theta = " + kv::format_double(th));
  }
  const double cps = std::cos(ps);
  const double sps = std::sin(ps);

  State d;
  d[sx::px] = u * cps * cth + w * cps * sth;
  d[sx::py] = u * sps * cth + w * sps * sth;
  d[sx::pz] = w * cth - u * sth;
  d[sx::theta] = q;
  d[sx::psi] = r / cth;
  d[sx::u] = p.X_uu * u * u + p.k * x[sx::duc];
  d[sx::w] = p.Z_wabsw * w * std::abs(w) + p.WB * cth;
  d[sx::q] = p.M_uq * u * q + p.M_q * q - p.B_zB * sth + p.b * u * u * x[sx::dqc];
  d[sx::r] = p.N_ur * u * r + p.c * u * u * x[sx::drc];
  d[sx::duc] = p.K_du * (in[ix::du] - x[sx::duc]);
  d[sx::dqc] = p.K_dq * (in[ix::dq] - x[sx::dqc]);
  d[sx::drc] = p.K_dr * (in[ix::dr] - x[sx::drc]);
  return d;
}

Output output_map(const State& x) {
  Output y;
  y << x[sx::theta], x[sx::psi], x[sx::u], x[sx::q], x[sx::r], x[sx::duc], x[sx::dqc], x[sx::drc];
  return y;
}

State lift(const Output& y) {
  State x = State::Zero();
  x[sx::theta] = y[ox::theta];
  x[sx::psi] = y[ox::psi];
  x[sx::u] = y[ox::u];
  x[sx::q] = y[ox::q];
  x[sx::r] = y[ox::r];
  x[sx::duc] = y[ox::duc];
  x[sx::dqc] = y[ox::dqc];
  x[sx::drc] = y[ox::drc];
  return x;
}

std::vector<State> rk4(const State& x0, const std::vector<Input>& inputs, double delta, int steps,
                       const std::function<State(const State&, const Input&)>& rhs) {
  if (!(delta > 0.0)) throw std::invalid_argument("rk4: delta must be positive");
  if (steps < 0 || inputs.size() < static_cast<std::size_t>(steps)) {
    throw std::invalid_argument("rk4: input trajectory shorter than step count");
  }
  std::vector<State> out;
  out.reserve(steps + 1);
  out.push_back(x0);
  State x = x0;
  for (int k = 0; k < steps; ++k) {
    const Input& u = inputs[k];
    const State k1 = rhs(x, u);
    const State k2 = rhs(x + 0.5 * delta * k1, u);
    const State k3 = rhs(x + 0.5 * delta * k2, u);
    const State k4 = rhs(x + delta * k3, u);
    x += (delta / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    x[sx::psi] = wrap_angle(x[sx::psi]);
    out.push_back(x);
  }
  return out;
}

std::vector<State> integrate_truth(const State& x0, const std::vector<Input>& inputs,
                                   const TruthParams& p, double delta, int steps) {
  if (steps < 0 || inputs.size() < static_cast<std::size_t>(steps)) {
    throw std::invalid_argument("integrate_truth: fewer inputs than steps");
  }
  const auto rhs = [&p](const State& x, const Input& u) { return truth_rhs(x, u, p); };
  const double gain[3] = {p.K_du, p.K_dq, p.K_dr};
  const int slot[3] = {sx::duc, sx::dqc, sx::drc};
  std::vector<State> xs;
  xs.reserve(steps + 1);
  xs.push_back(x0);
  for (int k = 0; k < steps; ++k) {
    const std::vector<Input> held{inputs[k]};
    State next = rk4(xs.back(), held, delta, 1, rhs).back();
    // Under a held input the lag states have an exact solution; use it.
    for (int c = 0; c < 3; ++c) {
      const double target = inputs[k][c];
      next[slot[c]] = target + (xs.back()[slot[c]] - target) * std::exp(-gain[c] * delta);
    }
    xs.push_back(next);
  }
  return xs;
}

namespace {

struct Field {
  const char* key;
  double TruthParams::*member;
};

constexpr Field kFields[] = {
    {"X_uu", &TruthParams::X_uu}, {"k", &TruthParams::k},       {"M_uq", &TruthParams::M_uq},
    {"M_q", &TruthParams::M_q},   {"B_zB", &TruthParams::B_zB}, {"b", &TruthParams::b},
    {"N_ur", &TruthParams::N_ur}, {"c", &TruthParams::c},       {"Z_wabsw", &TruthParams::Z_wabsw},
    {"WB", &TruthParams::WB},     {"K_du", &TruthParams::K_du}, {"K_dq", &TruthParams::K_dq},
    {"K_dr", &TruthParams::K_dr},
};

}  // namespace

TruthParams load_truth_params(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) throw ConfigError("params file not found: " + file.string());
  const auto doc = kv::read_file(file);
  for (const auto& [section, values] : doc) {
    if (section != "truth_params") {
      throw ConfigError("unexpected section [" + section + "] in " + file.string());
    }
  }
  kv::SectionReader reader(doc, "truth_params");
  TruthParams p;
  for (const auto& f : kFields) p.*f.member = reader.get_double(f.key);
  reader.finish();
  p.validate();
  return p;
}

void save_truth_params(const TruthParams& p, const std::filesystem::path& file) {
  kv::Document doc;
  auto& sec = doc["truth_params"];
  for (const auto& f : kFields) sec[f.key] = kv::format_double(p.*f.member);
  kv::write_file(doc, file);
}

}  // namespace plant
}  // namespace auvid
