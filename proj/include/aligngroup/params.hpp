#pragma once

#include <array>
#include <cmath>
#include <string>

#include "aligngroup/rng.hpp"
#include "aligngroup/types.hpp"

namespace aligngroup {

enum class Strategy { kCentroid, kBarycenter };
enum class Scope { kSmall, kBig };
enum class InfoNceMode { kLiteral, kCrossPair };
enum class BprMode { kLiteral, kLogSigmoid };

inline const char* to_string(Strategy s) {
  return s == Strategy::kCentroid ? "centroid" : "barycenter";
}
inline const char* to_string(Scope s) {
  return s == Scope::kSmall ? "small" : "big";
}
inline const char* to_string(InfoNceMode m) {
  return m == InfoNceMode::kLiteral ? "literal" : "cross-pair";
}
inline const char* to_string(BprMode m) {
  return m == BprMode::kLiteral ? "literal" : "log-sigmoid";
}

struct TrainConfig {
  Index d = 32;
  Index layers = 3;
  double tau = 0.2;
  double lambda_align = 0.1;
  double lr = 1e-3;
  Index epochs = 200;
  std::uint64_t seed = 42;
  Strategy strategy = Strategy::kCentroid;
  Scope scope = Scope::kSmall;
  InfoNceMode infonce_mode = InfoNceMode::kLiteral;
  BprMode bpr_mode = BprMode::kLiteral;
  bool interrl_enabled = true;
  Index eval_neg_count = 100;
  Index train_neg_per_pos = 1;
  Index batch_size = 1024;
  Index patience = 20;  // early stop on group H@10 plateau

  void validate() const {
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (tau <= 0.0) throw ConfigError("tau must be > 0");
    if (lambda_align < 0.0) throw ConfigError("lambda_align must be >= 0");
    if (d < 2) throw ConfigError("d must be >= 2");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (eval_neg_count < 1 || train_neg_per_pos < 1 || batch_size < 1)
      throw ConfigError("counts must be positive");
  }
};

// All trainable tensors plus paired gradient and Adam moment storage.
struct ParameterSet {
  Mat e_user;    // num_users x d
  Mat e_item;    // num_items x d
  Mat e_group;   // num_groups x d
  Mat w_fuse;    // 2d x d
  Mat w1;        // d x 8
  Mat w2;        // 8 x 1

  struct Slot {
    const char* name;
    Mat* value;
    Mat grad, m, v;
  };
  std::array<Slot, 6> slots;

  ParameterSet() { bind(); }
  ParameterSet(const ParameterSet& o)
      : e_user(o.e_user), e_item(o.e_item), e_group(o.e_group),
        w_fuse(o.w_fuse), w1(o.w1), w2(o.w2) {
    bind();
    for (std::size_t k = 0; k < slots.size(); ++k) {
      slots[k].grad = o.slots[k].grad;
      slots[k].m = o.slots[k].m;
      slots[k].v = o.slots[k].v;
    }
  }
  ParameterSet& operator=(const ParameterSet& o) {
    e_user = o.e_user; e_item = o.e_item; e_group = o.e_group;
    w_fuse = o.w_fuse; w1 = o.w1; w2 = o.w2;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      slots[k].grad = o.slots[k].grad;
      slots[k].m = o.slots[k].m;
      slots[k].v = o.slots[k].v;
    }
    return *this;
  }

  void zero_aux() {
    for (auto& s : slots) {
      s.grad.setZero(s.value->rows(), s.value->cols());
      s.m.setZero(s.value->rows(), s.value->cols());
      s.v.setZero(s.value->rows(), s.value->cols());
    }
  }

 private:
  void bind() {
    slots = {{{"e_user", &e_user, {}, {}, {}},
              {"e_item", &e_item, {}, {}, {}},
              {"e_group", &e_group, {}, {}, {}},
              {"w_fuse", &w_fuse, {}, {}, {}},
              {"w1", &w1, {}, {}, {}},
              {"w2", &w2, {}, {}, {}}}};
  }
};

// Xavier-uniform for the embedding tables, Normal(0, 0.1) for the hidden
// weights. Deterministic given the seed.
inline ParameterSet init_parameters(const TrainConfig& cfg, Index num_users,
                                    Index num_items, Index num_groups) {
  cfg.validate();
  ParameterSet p;
  Rng rng(cfg.seed);

  auto xavier = [&](Mat& m, Index rows, Index cols) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(rows + cols));
    m.resize(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  };
  auto gaussian = [&](Mat& m, Index rows, Index cols) {
    m.resize(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, 0.1);
  };

  xavier(p.e_user, num_users, cfg.d);
  xavier(p.e_item, num_items, cfg.d);
  xavier(p.e_group, num_groups, cfg.d);
  gaussian(p.w_fuse, 2 * cfg.d, cfg.d);
  gaussian(p.w1, cfg.d, 8);
  gaussian(p.w2, 8, 1);
  p.zero_aux();
  return p;
}

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over all slots; t is the 1-based step number.
inline void adam_step(ParameterSet& p, const AdamOptions& opt, Index t) {
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(t));
  for (auto& s : p.slots) {
    s.m = opt.beta1 * s.m + (1.0 - opt.beta1) * s.grad;
    s.v = opt.beta2 * s.v.array().matrix() +
          (1.0 - opt.beta2) * s.grad.cwiseProduct(s.grad);
    const Mat m_hat = s.m / bc1;
    const Mat v_hat = s.v / bc2;
    *s.value -=
        opt.lr * (m_hat.array() / (v_hat.array().sqrt() + opt.eps)).matrix();
    if (!s.value->allFinite())
      throw NumericError(std::string("non-finite parameter after Adam step: ") +
                         s.name);
  }
}

}  // namespace aligngroup
