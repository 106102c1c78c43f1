#pragma once

#include <optional>
#include <string>
#include <vector>

#include "auvid/constraints.hpp"
#include "auvid/graybox.hpp"
#include "auvid/mlp.hpp"
#include "auvid/spectral.hpp"

namespace auvid::models {

enum class ModelKind { Blackbox, ConstrainedBlackbox, Graybox, Hybrid };

/// One of the six compared model types. Parsed from
/// `blackbox | cblackbox | graybox | hybrid:<e_mu>`.
struct Variant {
  ModelKind kind = ModelKind::Blackbox;
  double e_mu = 0.0;  // Hybrid only

  static Variant parse(const std::string& text);
  /// blackbox, cblackbox, hybrid:1.0, hybrid:0.5, hybrid:0.3, graybox.
  static std::vector<Variant> all();

  std::string name() const;
  /// Filesystem-safe form of name() (':' replaced by '-').
  std::string slug() const;
  static Variant from_slug(const std::string& slug);

  bool has_mlp() const { return kind != ModelKind::Graybox; }
  bool has_graybox() const { return kind == ModelKind::Graybox || kind == ModelKind::Hybrid; }

  bool operator==(const Variant&) const = default;
};

/// Construction options shared by every instance of the grid.
struct ModelOptions {
  std::vector<int> mlp_dims = nn::Mlp::default_dims();
  nn::SpectralBounds blackbox_bounds{0.5, 1.0};
  nn::SpectralBounds hybrid_bounds{0.0, 1.0};
  double penalty_weight = 1.0;
  double graybox_init_e_mu = 1.0;
};

/// A vector field z' = f(z, u) plus the selector of which parameters train.
///
///   Blackbox / ConstrainedBlackbox: f = MLP(z, u); MLP trains.
///   Graybox: f = graybox(mu_hat); the eight mu_hat entries train.
///   Hybrid:  f = graybox(mu_hat) + MLP(z, u); mu_hat frozen, MLP trains.
class TrainableModel {
 public:
  struct Cache {
    nn::MlpCache mlp;
  };

  TrainableModel() = default;

  /// Seeded construction: MLP fan-in init (then projection when bounded),
  /// graybox mu_hat_0 ~ S(e_mu = 1), hybrid mu_hat ~ S(variant e_mu).
  static TrainableModel make(const Variant& v, const plant::TruthParams& truth, excitation::Rng& rng,
                             const ModelOptions& opt = {});

  Variant variant;
  std::optional<nn::Mlp> mlp;
  std::optional<GrayboxParams> gray;
  std::optional<nn::SpectralBounds> bounds;
  std::optional<ConstraintSpec> constraint;  // boundary penalty, constrained blackbox only

  Eigen::Index n_trainable() const;
  Eigen::VectorXd trainable_params() const;
  void set_trainable_params(const Eigen::Ref<const Eigen::VectorXd>& p);

  Output rhs(const Output& z, const Input& u, Cache* cache = nullptr) const;

  /// Returns v^T df/dz and adds v^T df/d(trainable) into `dparams`. `cache`
  /// must come from rhs() at the same (z, u).
  Output vjp(const Output& z, const Input& u, const Output& v, const Cache& cache,
             Eigen::Ref<Eigen::VectorXd> dparams) const;

  /// Spectral projection of the MLP when the variant is bounded; no-op otherwise.
  void project();

  bool operator==(const TrainableModel& other) const;
};

/// Free-function form used by evaluation code.
inline Output model_rhs(const TrainableModel& m, const Output& z, const Input& u) { return m.rhs(z, u); }

}  // namespace auvid::models
