#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "aligngroup/types.hpp"

namespace aligngroup::ad {

// Reverse-mode tape over dense matrices. The graph is rebuilt every step and
// covers exactly the fixed forward computation of this model; it is not a
// general autodiff system.
//
// A Var is an index into the tape. Scalars are 1x1 matrices.
class Tape;

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  Var leaf(Mat value) { return push(std::move(value), {}); }

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }

  Var add(Var a, Var b) {
    Var out = push(value(a) + value(b), [this, a, b](const Mat& g) {
      accumulate(a, g);
      accumulate(b, g);
    });
    return out;
  }

  Var sub(Var a, Var b) {
    return push(value(a) - value(b), [this, a, b](const Mat& g) {
      accumulate(a, g);
      accumulate(b, -g);
    });
  }

  Var scale(Var a, double c) {
    return push(value(a) * c,
                [this, a, c](const Mat& g) { accumulate(a, c * g); });
  }

  // sum_k coeff_k * term_k over same-shaped matrices.
  Var linear_combination(const std::vector<std::pair<Var, double>>& terms) {
    Mat v = Mat::Zero(value(terms.front().first).rows(),
                      value(terms.front().first).cols());
    for (const auto& [t, c] : terms) v += c * value(t);
    auto ts = terms;
    return push(std::move(v), [this, ts](const Mat& g) {
      for (const auto& [t, c] : ts) accumulate(t, c * g);
    });
  }

  Var matmul(Var a, Var b) {
    return push(value(a) * value(b), [this, a, b](const Mat& g) {
      accumulate(a, g * value(b).transpose());
      accumulate(b, value(a).transpose() * g);
    });
  }

  // A is a constant (non-differentiated) left factor.
  Var matmul_const_left(const Mat& a, Var x) {
    return push(a * value(x),
                [this, a, x](const Mat& g) { accumulate(x, a.transpose() * g); });
  }

  Var concat_cols(Var a, Var b) {
    Mat v(value(a).rows(), value(a).cols() + value(b).cols());
    v << value(a), value(b);
    const Index ca = value(a).cols();
    return push(std::move(v), [this, a, b, ca](const Mat& g) {
      accumulate(a, g.leftCols(ca));
      accumulate(b, g.rightCols(g.cols() - ca));
    });
  }

  Var concat_rows(Var a, Var b) {
    Mat v(value(a).rows() + value(b).rows(), value(a).cols());
    v << value(a), value(b);
    const Index ra = value(a).rows();
    return push(std::move(v), [this, a, b, ra](const Mat& g) {
      accumulate(a, g.topRows(ra));
      accumulate(b, g.bottomRows(g.rows() - ra));
    });
  }

  Var cmul(Var a, Var b) {
    return push(value(a).cwiseProduct(value(b)), [this, a, b](const Mat& g) {
      accumulate(a, g.cwiseProduct(value(b)));
      accumulate(b, g.cwiseProduct(value(a)));
    });
  }

  Var gather_rows(Var src, std::vector<Index> rows) {
    Mat v(static_cast<Index>(rows.size()), value(src).cols());
    for (std::size_t k = 0; k < rows.size(); ++k)
      v.row(static_cast<Index>(k)) = value(src).row(rows[k]);
    return push(std::move(v), [this, src, rows = std::move(rows)](const Mat& g) {
      Mat gs = Mat::Zero(value(src).rows(), value(src).cols());
      for (std::size_t k = 0; k < rows.size(); ++k)
        gs.row(rows[k]) += g.row(static_cast<Index>(k));
      accumulate(src, gs);
    });
  }

  // Row s of the output is the mean of src rows listed in sets[s]; an empty
  // set yields the zero row.
  Var set_mean_rows(Var src, std::vector<std::vector<Index>> sets) {
    Mat v = Mat::Zero(static_cast<Index>(sets.size()), value(src).cols());
    for (std::size_t s = 0; s < sets.size(); ++s) {
      if (sets[s].empty()) continue;
      for (Index r : sets[s]) v.row(static_cast<Index>(s)) += value(src).row(r);
      v.row(static_cast<Index>(s)) /= static_cast<double>(sets[s].size());
    }
    return push(std::move(v), [this, src, sets = std::move(sets)](const Mat& g) {
      Mat gs = Mat::Zero(value(src).rows(), value(src).cols());
      for (std::size_t s = 0; s < sets.size(); ++s) {
        if (sets[s].empty()) continue;
        const double inv = 1.0 / static_cast<double>(sets[s].size());
        for (Index r : sets[s]) gs.row(r) += inv * g.row(static_cast<Index>(s));
      }
      accumulate(src, gs);
    });
  }

  // Row v of the output is sum_k w * src.row(idx) over weights[v]; rows with
  // an empty weight list copy the matching fallback row instead.
  Var weighted_rows_or_fallback(
      Var src, Var fallback,
      std::vector<std::vector<std::pair<Index, double>>> weights) {
    Mat v = Mat::Zero(static_cast<Index>(weights.size()), value(src).cols());
    for (std::size_t r = 0; r < weights.size(); ++r) {
      if (weights[r].empty()) {
        v.row(static_cast<Index>(r)) = value(fallback).row(static_cast<Index>(r));
      } else {
        for (const auto& [idx, w] : weights[r])
          v.row(static_cast<Index>(r)) += w * value(src).row(idx);
      }
    }
    return push(std::move(v), [this, src, fallback,
                               weights = std::move(weights)](const Mat& g) {
      Mat gs = Mat::Zero(value(src).rows(), value(src).cols());
      Mat gf = Mat::Zero(value(fallback).rows(), value(fallback).cols());
      for (std::size_t r = 0; r < weights.size(); ++r) {
        if (weights[r].empty()) {
          gf.row(static_cast<Index>(r)) += g.row(static_cast<Index>(r));
        } else {
          for (const auto& [idx, w] : weights[r])
            gs.row(idx) += w * g.row(static_cast<Index>(r));
        }
      }
      accumulate(src, gs);
      accumulate(fallback, gf);
    });
  }

  // Per-set coordinate-wise (max + min) / 2 over src rows. Ties route the
  // subgradient to the first extremal row.
  Var set_minmax_mid_rows(Var src, std::vector<std::vector<Index>> sets) {
    const Index d = value(src).cols();
    Mat v = Mat::Zero(static_cast<Index>(sets.size()), d);
    // argmax/argmin row per (set, column), captured for the backward pass.
    std::vector<std::vector<Index>> amax(sets.size()), amin(sets.size());
    for (std::size_t s = 0; s < sets.size(); ++s) {
      amax[s].assign(d, -1);
      amin[s].assign(d, -1);
      if (sets[s].empty()) continue;
      for (Index c = 0; c < d; ++c) {
        double mx = value(src)(sets[s][0], c), mn = mx;
        Index rmx = sets[s][0], rmn = sets[s][0];
        for (Index r : sets[s]) {
          const double x = value(src)(r, c);
          if (x > mx) { mx = x; rmx = r; }
          if (x < mn) { mn = x; rmn = r; }
        }
        v(static_cast<Index>(s), c) = 0.5 * (mx + mn);
        amax[s][c] = rmx;
        amin[s][c] = rmn;
      }
    }
    return push(std::move(v), [this, src, amax = std::move(amax),
                               amin = std::move(amin)](const Mat& g) {
      Mat gs = Mat::Zero(value(src).rows(), value(src).cols());
      for (std::size_t s = 0; s < amax.size(); ++s) {
        for (Index c = 0; c < gs.cols(); ++c) {
          if (amax[s][c] < 0) continue;
          gs(amax[s][c], c) += 0.5 * g(static_cast<Index>(s), c);
          gs(amin[s][c], c) += 0.5 * g(static_cast<Index>(s), c);
        }
      }
      accumulate(src, gs);
    });
  }

  Var leaky_relu(Var a, double slope) {
    Mat v = value(a).unaryExpr(
        [slope](double x) { return x >= 0.0 ? x : slope * x; });
    return push(std::move(v), [this, a, slope](const Mat& g) {
      accumulate(a, g.cwiseProduct(value(a).unaryExpr([slope](double x) {
        return x >= 0.0 ? 1.0 : slope;
      })));
    });
  }

  Var sigmoid(Var a) {
    Mat v = value(a).unaryExpr([](double x) {
      return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
    });
    Var out = push(std::move(v), {});
    nodes_[out.id].backward = [this, a, out](const Mat& g) {
      const Mat& y = value(out);
      accumulate(a, g.cwiseProduct(y.cwiseProduct(Mat::Ones(y.rows(), y.cols()) - y)));
    };
    return out;
  }

  // log(sigmoid(x)) elementwise, computed without overflow.
  Var log_sigmoid(Var a) {
    Mat v = value(a).unaryExpr([](double x) {
      return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
    });
    return push(std::move(v), [this, a](const Mat& g) {
      // d/dx log sigma(x) = 1 - sigma(x) = sigma(-x)
      accumulate(a, g.cwiseProduct(value(a).unaryExpr([](double x) {
        return x >= 0.0 ? std::exp(-x) / (1.0 + std::exp(-x))
                        : 1.0 / (1.0 + std::exp(x));
      })));
    });
  }

  // Row-wise dot products of two same-shaped matrices -> n x 1.
  Var row_dot(Var a, Var b) {
    Mat v = value(a).cwiseProduct(value(b)).rowwise().sum();
    return push(std::move(v), [this, a, b](const Mat& g) {
      accumulate(a, value(b).array().colwise() * g.col(0).array());
      accumulate(b, value(a).array().colwise() * g.col(0).array());
    });
  }

  // Weighted sum of an n x 1 column -> scalar.
  Var weighted_sum(Var col, Vec weights) {
    Mat v(1, 1);
    v(0, 0) = value(col).col(0).dot(weights);
    return push(std::move(v), [this, col, weights = std::move(weights)](const Mat& g) {
      accumulate(col, weights * g(0, 0));
    });
  }

  // Contrastive alignment losses (max-subtracted log-sum-exp throughout).
  //
  // Literal form: with a_p = dots_p / tau,
  //   L = sum_p (logsumexp(a) - a_p) = n * logsumexp(a) - sum_p a_p.
  Var infonce_from_dots(Var dots, double tau) {
    const Vec a = value(dots).col(0) / tau;
    const Index n = a.size();
    const double m = a.maxCoeff();
    const double lse = m + std::log((a.array() - m).exp().sum());
    Mat v(1, 1);
    v(0, 0) = static_cast<double>(n) * lse - a.sum();
    Vec soft = (a.array() - lse).exp();
    return push(std::move(v), [this, dots, soft = std::move(soft), tau,
                               n](const Mat& g) {
      Vec da = (static_cast<double>(n) * soft.array() - 1.0) / tau;
      accumulate(dots, da * g(0, 0));
    });
  }

  // Cross-pair form: S(q,p) = Ec.row(q) . Eg.row(p) / tau,
  //   L = sum_p (logsumexp_q S(q,p) - S(p,p)).
  Var infonce_cross_pairs(Var consensus, Var anchors, double tau) {
    const Mat s = value(consensus) * value(anchors).transpose() / tau;
    const Index n = s.rows();
    double loss = 0.0;
    Mat dS = Mat::Zero(n, n);
    for (Index p = 0; p < n; ++p) {
      const Vec col = s.col(p);
      const double m = col.maxCoeff();
      const double lse = m + std::log((col.array() - m).exp().sum());
      loss += lse - s(p, p);
      dS.col(p) = (col.array() - lse).exp();
      dS(p, p) -= 1.0;
    }
    Mat v(1, 1);
    v(0, 0) = loss;
    return push(std::move(v), [this, consensus, anchors, dS = std::move(dS),
                               tau](const Mat& g) {
      accumulate(consensus, (g(0, 0) / tau) * dS * value(anchors));
      accumulate(anchors, (g(0, 0) / tau) * dS.transpose() * value(consensus));
    });
  }

  // Runs the reverse pass from a scalar root. Gradients of all reachable
  // nodes are reset first, so a tape may be extended and re-run.
  void backward(Var root) {
    if (value(root).size() != 1)
      throw NumericError("backward requires a scalar root");
    for (auto& n : nodes_) n.grad.setZero(n.value.rows(), n.value.cols());
    nodes_[root.id].grad(0, 0) = 1.0;
    for (int i = root.id; i >= 0; --i) {
      if (nodes_[i].backward && nodes_[i].grad.cwiseAbs().sum() != 0.0)
        nodes_[i].backward(nodes_[i].grad);
    }
  }

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(const Mat&)> backward;
  };

  Var push(Mat v, std::function<void(const Mat&)> bw) {
    if (!v.allFinite())
      throw NumericError("non-finite value at tape node " +
                         std::to_string(nodes_.size()));
    Node n;
    n.value = std::move(v);
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.backward = std::move(bw);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  void accumulate(Var v, const Mat& g) { nodes_[v.id].grad += g; }

  std::vector<Node> nodes_;
};

}  // namespace aligngroup::ad
