#include "auvid/graybox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "auvid/kvconfig.hpp"

namespace auvid::models {

GrayboxParams GrayboxParams::from_truth(const plant::TruthParams& p) {
  GrayboxParams g;
  g.mu = p.mu();
  g.K << p.K_du, p.K_dq, p.K_dr;
  return g;
}

GrayboxParams sample_offset_params(const plant::TruthParams& truth, double e_mu, excitation::Rng& rng) {
  if (!(e_mu >= 0.0 && e_mu <= 1.0)) throw std::invalid_argument("sample_offset_params: e_mu outside [0, 1]");
  GrayboxParams g = GrayboxParams::from_truth(truth);
  for (int i = 0; i < 8; ++i) {
    const double a = g.mu[i] * (1.0 - e_mu);
    const double b = g.mu[i] * (1.0 + e_mu);
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    // Always consume one draw so streams stay aligned across e_mu values.
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    g.mu[i] = lo == hi ? lo : std::min(hi, lo + t * (hi - lo));
  }
  return g;
}

namespace {

void check_theta(double cth, double th) {
  if (cth <= plant::kCosThetaEps) {
    throw SingularityError("graybox_rhs: cos(theta) <= 1e-9 at theta = " + kv::format_double(th));
  }
}

}  // namespace

Output graybox_rhs(const GrayboxParams& p, const Output& z, const Input& in) {
  using namespace mu_index;
  const double th = z[ox::theta];
  const double u = z[ox::u];
  const double q = z[ox::q];
  const double r = z[ox::r];
  const double cth = std::cos(th);
  check_theta(cth, th);
  const auto& m = p.mu;
  Output f;
  f[ox::theta] = q;
  f[ox::psi] = r / cth;
  f[ox::u] = m[X_uu] * u * u + m[k] * z[ox::duc];
  f[ox::q] = m[M_uq] * u * q + m[M_q] * q - m[B_zB] * std::sin(th) + m[b] * u * u * z[ox::dqc];
  f[ox::r] = m[N_ur] * u * r + m[c] * u * u * z[ox::drc];
  f[ox::duc] = p.K[0] * (in[ix::du] - z[ox::duc]);
  f[ox::dqc] = p.K[1] * (in[ix::dq] - z[ox::dqc]);
  f[ox::drc] = p.K[2] * (in[ix::dr] - z[ox::drc]);
  return f;
}

Output graybox_vjp(const GrayboxParams& p, const Output& z, const Input& /*u*/, const Output& v, MuVec& dmu) {
  using namespace mu_index;
  const double th = z[ox::theta];
  const double u = z[ox::u];
  const double q = z[ox::q];
  const double r = z[ox::r];
  const double duc = z[ox::duc];
  const double dqc = z[ox::dqc];
  const double drc = z[ox::drc];
  const double cth = std::cos(th);
  const double sth = std::sin(th);
  check_theta(cth, th);
  const auto& m = p.mu;

  Output g = Output::Zero();
  // theta' = q
  g[ox::q] += v[ox::theta];
  // psi' = r / cos(theta)
  g[ox::r] += v[ox::psi] / cth;
  g[ox::theta] += v[ox::psi] * r * sth / (cth * cth);
  // u'
  g[ox::u] += v[ox::u] * 2.0 * m[X_uu] * u;
  g[ox::duc] += v[ox::u] * m[k];
  dmu[X_uu] += v[ox::u] * u * u;
  dmu[k] += v[ox::u] * duc;
  // q'
  g[ox::u] += v[ox::q] * (m[M_uq] * q + 2.0 * m[b] * u * dqc);
  g[ox::q] += v[ox::q] * (m[M_uq] * u + m[M_q]);
  g[ox::theta] += -v[ox::q] * m[B_zB] * cth;
  g[ox::dqc] += v[ox::q] * m[b] * u * u;
  dmu[M_uq] += v[ox::q] * u * q;
  dmu[M_q] += v[ox::q] * q;
  dmu[B_zB] += -v[ox::q] * sth;
  dmu[b] += v[ox::q] * u * u * dqc;
  // r'
  g[ox::u] += v[ox::r] * (m[N_ur] * r + 2.0 * m[c] * u * drc);
  g[ox::r] += v[ox::r] * m[N_ur] * u;
  g[ox::drc] += v[ox::r] * m[c] * u * u;
  dmu[N_ur] += v[ox::r] * u * r;
  dmu[c] += v[ox::r] * u * u * drc;
  // delay rows
  g[ox::duc] -= v[ox::duc] * p.K[0];
  g[ox::dqc] -= v[ox::dqc] * p.K[1];
  g[ox::drc] -= v[ox::drc] * p.K[2];
  return g;
}

}  // namespace auvid::models
