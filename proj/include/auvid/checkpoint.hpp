#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "auvid/adamw.hpp"
#include "auvid/model.hpp"

namespace auvid::ckpt {

inline constexpr int kFormatVersion = 1;

/// Everything needed to resume or evaluate one trained instance.
///
/// On disk this is a JSON object:
///
///   format        "auvid-checkpoint"
///   version       1
///   variant       "blackbox" | "cblackbox" | "graybox" | "hybrid:<e>"
///   seed          grid seed index
///   init_seed     initialization seed (decimal string, 64-bit)
///   config_hash   TrainConfig fingerprint
///   diverged      bool, diverged_at string
///   mlp           null | {dims: [..], activation: "tanh", params: [..]}
///                 params are layer by layer, weight row-major then bias
///   graybox       null | {mu: [8], K: [3]}
///   spectral_bounds  null | {sigma_min, sigma_max}
///   penalty       null | {weight, lower: [8], upper: [8]}  (infinite as null)
///   optimizer     {step, lr, beta1, beta2, eps, weight_decay, m: [..], v: [..]}
///
/// Doubles are written in shortest round-trip form.
struct Checkpoint {
  models::TrainableModel model;
  nn::AdamWState optimizer;
  std::string config_hash;
  int seed = 0;
  std::uint64_t init_seed = 0;
  bool diverged = false;
  std::string diverged_at;
};

std::string to_json(const Checkpoint& c);
Checkpoint from_json(const std::string& text);

/// Atomic write (temp file then rename).
void save(const Checkpoint& c, const std::filesystem::path& file);
Checkpoint load(const std::filesystem::path& file);

}  // namespace auvid::ckpt
