#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "pocketdex/tensor.hpp"

namespace pocketdex {

// Reverse-mode differentiation tape at tensor-op granularity. Nodes are
// created in topological order; backward() walks them in reverse. All
// reductions run in a fixed order, so results are reproducible bitwise for
// a fixed graph.
class Tape {
 public:
  using VarId = int;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  VarId leaf(const Tensor& t) { return push(t, true, {}); }
  VarId constant(Tensor t) { return push(std::move(t), false, {}); }

  const Tensor& val(VarId id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Tensor& grad(VarId id) const { return nodes_[static_cast<size_t>(id)].grad; }
  double scalar(VarId id) const { return val(id).data[0]; }
  size_t node_count() const { return nodes_.size(); }

  // ---- arithmetic ----

  VarId add(VarId a, VarId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require(ta.same_shape(tb), "add: shape mismatch " + ta.shape_str() + " vs " + tb.shape_str());
    Tensor out = ta;
    for (size_t i = 0; i < out.size(); ++i) out.data[i] += tb.data[i];
    return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, const Node& n) {
      t.accum(a, n.grad);
      t.accum(b, n.grad);
    });
  }

  VarId sub(VarId a, VarId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require(ta.same_shape(tb), "sub: shape mismatch");
    Tensor out = ta;
    for (size_t i = 0; i < out.size(); ++i) out.data[i] -= tb.data[i];
    return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, const Node& n) {
      t.accum(a, n.grad);
      t.accum_neg(b, n.grad);
    });
  }

  VarId mul(VarId a, VarId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require(ta.same_shape(tb), "mul: shape mismatch");
    Tensor out = ta;
    for (size_t i = 0; i < out.size(); ++i) out.data[i] *= tb.data[i];
    return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, const Node& n) {
      if (t.needs(a)) {
        Tensor& ga = t.grad_mut(a);
        const Tensor& vb = t.val(b);
        for (size_t i = 0; i < n.grad.size(); ++i) ga.data[i] += n.grad.data[i] * vb.data[i];
      }
      if (t.needs(b)) {
        Tensor& gb = t.grad_mut(b);
        const Tensor& va = t.val(a);
        for (size_t i = 0; i < n.grad.size(); ++i) gb.data[i] += n.grad.data[i] * va.data[i];
      }
    });
  }

  VarId scale(VarId a, double c) {
    Tensor out = val(a);
    for (auto& v : out.data) v *= c;
    return push(std::move(out), needs(a), [a, c](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      for (size_t i = 0; i < n.grad.size(); ++i) ga.data[i] += c * n.grad.data[i];
    });
  }

  // ---- linear algebra ----

  VarId matmul(VarId a, VarId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require(ta.cols() == tb.rows(), "matmul: inner dims " + ta.shape_str() + " * " + tb.shape_str());
    Tensor out({ta.rows(), tb.cols()});
    matmul_into(ta, tb, out);
    return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, const Node& n) {
      if (t.needs(a)) matmul_a_bt_accum(n.grad, t.val(b), t.grad_mut(a));
      if (t.needs(b)) matmul_at_b_accum(t.val(a), n.grad, t.grad_mut(b));
    });
  }

  VarId transpose(VarId a) {
    const Tensor& ta = val(a);
    Tensor out({ta.cols(), ta.rows()});
    for (size_t i = 0; i < ta.rows(); ++i)
      for (size_t j = 0; j < ta.cols(); ++j) out.at(j, i) = ta.at(i, j);
    return push(std::move(out), needs(a), [a](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      for (size_t i = 0; i < n.grad.rows(); ++i)
        for (size_t j = 0; j < n.grad.cols(); ++j) ga.at(j, i) += n.grad.at(i, j);
    });
  }

  // a: [m x n], bias: [n] broadcast over rows.
  VarId add_row_broadcast(VarId a, VarId bias) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(bias);
    require(tb.size() == ta.cols(), "add_row_broadcast: bias length");
    Tensor out = ta;
    for (size_t i = 0; i < ta.rows(); ++i)
      for (size_t j = 0; j < ta.cols(); ++j) out.at(i, j) += tb.data[j];
    return push(std::move(out), needs(a) || needs(bias), [a, bias](Tape& t, const Node& n) {
      t.accum(a, n.grad);
      if (t.needs(bias)) {
        Tensor& gb = t.grad_mut(bias);
        for (size_t i = 0; i < n.grad.rows(); ++i)
          for (size_t j = 0; j < n.grad.cols(); ++j) gb.data[j] += n.grad.at(i, j);
      }
    });
  }

  VarId row_gather(VarId a, std::vector<size_t> rows) {
    const Tensor& ta = val(a);
    const size_t n = ta.cols();
    Tensor out({rows.size(), n});
    for (size_t r = 0; r < rows.size(); ++r)
      for (size_t j = 0; j < n; ++j) out.at(r, j) = ta.at(rows[r], j);
    return push(std::move(out), needs(a), [a, rows = std::move(rows)](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      for (size_t r = 0; r < rows.size(); ++r)
        for (size_t j = 0; j < n.grad.cols(); ++j) ga.at(rows[r], j) += n.grad.at(r, j);
    });
  }

  VarId col_range(VarId a, size_t c0, size_t c1) {
    const Tensor& ta = val(a);
    require(c0 < c1 && c1 <= ta.cols(), "col_range: bad range");
    Tensor out({ta.rows(), c1 - c0});
    for (size_t i = 0; i < ta.rows(); ++i)
      for (size_t j = c0; j < c1; ++j) out.at(i, j - c0) = ta.at(i, j);
    return push(std::move(out), needs(a), [a, c0](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      for (size_t i = 0; i < n.grad.rows(); ++i)
        for (size_t j = 0; j < n.grad.cols(); ++j) ga.at(i, c0 + j) += n.grad.at(i, j);
    });
  }

  VarId concat_cols(const std::vector<VarId>& parts) {
    require(!parts.empty(), "concat_cols: empty");
    size_t rows = val(parts[0]).rows(), total = 0;
    bool any = false;
    for (VarId p : parts) {
      require(val(p).rows() == rows, "concat_cols: row mismatch");
      total += val(p).cols();
      any = any || needs(p);
    }
    Tensor out({rows, total});
    size_t off = 0;
    for (VarId p : parts) {
      const Tensor& tp = val(p);
      for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < tp.cols(); ++j) out.at(i, off + j) = tp.at(i, j);
      off += tp.cols();
    }
    return push(std::move(out), any, [parts](Tape& t, const Node& n) {
      size_t off = 0;
      for (VarId p : parts) {
        const size_t pc = t.val(p).cols();
        if (t.needs(p)) {
          Tensor& gp = t.grad_mut(p);
          for (size_t i = 0; i < n.grad.rows(); ++i)
            for (size_t j = 0; j < pc; ++j) gp.at(i, j) += n.grad.at(i, off + j);
        }
        off += pc;
      }
    });
  }

  VarId stack_rows(const std::vector<VarId>& rows) {
    require(!rows.empty(), "stack_rows: empty");
    const size_t n = val(rows[0]).size();
    bool any = false;
    Tensor out({rows.size(), n});
    for (size_t r = 0; r < rows.size(); ++r) {
      const Tensor& tr = val(rows[r]);
      require(tr.size() == n, "stack_rows: length mismatch");
      for (size_t j = 0; j < n; ++j) out.at(r, j) = tr.data[j];
      any = any || needs(rows[r]);
    }
    return push(std::move(out), any, [rows](Tape& t, const Node& n) {
      for (size_t r = 0; r < rows.size(); ++r) {
        if (!t.needs(rows[r])) continue;
        Tensor& gr = t.grad_mut(rows[r]);
        for (size_t j = 0; j < n.grad.cols(); ++j) gr.data[j] += n.grad.at(r, j);
      }
    });
  }

  VarId reshape(VarId a, std::vector<size_t> shape) {
    const Tensor& ta = val(a);
    require(Tensor::element_count(shape) == ta.size(), "reshape: element count");
    Tensor out(std::move(shape), ta.data);
    return push(std::move(out), needs(a), [a](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      for (size_t i = 0; i < n.grad.size(); ++i) ga.data[i] += n.grad.data[i];
    });
  }

  // ---- nonlinearities ----

  VarId gelu(VarId a) {
    static constexpr double inv_sqrt2 = 0.7071067811865475244;
    static constexpr double inv_sqrt2pi = 0.3989422804014326779;
    const Tensor& ta = val(a);
    Tensor out = ta;
    for (auto& v : out.data) v = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
    return push(std::move(out), needs(a), [a](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      const Tensor& x = t.val(a);
      for (size_t i = 0; i < x.size(); ++i) {
        double xi = x.data[i];
        double d = 0.5 * (1.0 + std::erf(xi * inv_sqrt2)) +
                   xi * inv_sqrt2pi * std::exp(-0.5 * xi * xi);
        ga.data[i] += n.grad.data[i] * d;
      }
    });
  }

  VarId softplus(VarId a) {
    const Tensor& ta = val(a);
    Tensor out = ta;
    for (auto& v : out.data) v = v > 30.0 ? v : std::log1p(std::exp(v));
    return push(std::move(out), needs(a), [a](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      const Tensor& x = t.val(a);
      for (size_t i = 0; i < x.size(); ++i)
        ga.data[i] += n.grad.data[i] / (1.0 + std::exp(-x.data[i]));
    });
  }

  VarId layernorm(VarId a, VarId gamma, VarId beta, double eps = 1e-5) {
    const Tensor& ta = val(a);
    const size_t m = ta.rows(), n = ta.cols();
    require(val(gamma).size() == n && val(beta).size() == n, "layernorm: param length");
    Tensor out({m, n});
    Tensor xhat({m, n});
    Tensor rstd({m});
    for (size_t i = 0; i < m; ++i) {
      double mean = 0.0;
      for (size_t j = 0; j < n; ++j) mean += ta.at(i, j);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (size_t j = 0; j < n; ++j) {
        double d = ta.at(i, j) - mean;
        var += d * d;
      }
      var /= static_cast<double>(n);
      double rs = 1.0 / std::sqrt(var + eps);
      rstd.data[i] = rs;
      for (size_t j = 0; j < n; ++j) {
        double xh = (ta.at(i, j) - mean) * rs;
        xhat.at(i, j) = xh;
        out.at(i, j) = val(gamma).data[j] * xh + val(beta).data[j];
      }
    }
    return push(std::move(out), needs(a) || needs(gamma) || needs(beta),
                [a, gamma, beta, xhat = std::move(xhat), rstd = std::move(rstd)](Tape& t,
                                                                                 const Node& n) {
                  const size_t m = n.grad.rows(), nn = n.grad.cols();
                  const Tensor& gam = t.val(gamma);
                  if (t.needs(gamma)) {
                    Tensor& gg = t.grad_mut(gamma);
                    for (size_t i = 0; i < m; ++i)
                      for (size_t j = 0; j < nn; ++j) gg.data[j] += n.grad.at(i, j) * xhat.at(i, j);
                  }
                  if (t.needs(beta)) {
                    Tensor& gb = t.grad_mut(beta);
                    for (size_t i = 0; i < m; ++i)
                      for (size_t j = 0; j < nn; ++j) gb.data[j] += n.grad.at(i, j);
                  }
                  if (t.needs(a)) {
                    Tensor& ga = t.grad_mut(a);
                    for (size_t i = 0; i < m; ++i) {
                      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                      for (size_t j = 0; j < nn; ++j) {
                        double dxh = n.grad.at(i, j) * gam.data[j];
                        sum_dxhat += dxh;
                        sum_dxhat_xhat += dxh * xhat.at(i, j);
                      }
                      const double inv_n = 1.0 / static_cast<double>(nn);
                      for (size_t j = 0; j < nn; ++j) {
                        double dxh = n.grad.at(i, j) * gam.data[j];
                        ga.at(i, j) += rstd.data[i] *
                                       (dxh - inv_n * sum_dxhat - xhat.at(i, j) * inv_n * sum_dxhat_xhat);
                      }
                    }
                  }
                });
  }

  // Row softmax with an optional additive bias (e.g. a -1e9 padding mask).
  // The bias is a plain tensor, not a differentiable input.
  VarId softmax_rows(VarId a, const Tensor* add_bias = nullptr) {
    const Tensor& ta = val(a);
    const size_t m = ta.rows(), n = ta.cols();
    if (add_bias) require(add_bias->rows() == m && add_bias->cols() == n, "softmax bias shape");
    Tensor out({m, n});
    for (size_t i = 0; i < m; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < n; ++j) {
        double v = ta.at(i, j) + (add_bias ? add_bias->at(i, j) : 0.0);
        out.at(i, j) = v;
        if (v > mx) mx = v;
      }
      double denom = 0.0;
      for (size_t j = 0; j < n; ++j) {
        double e = std::exp(out.at(i, j) - mx);
        out.at(i, j) = e;
        denom += e;
      }
      for (size_t j = 0; j < n; ++j) out.at(i, j) /= denom;
    }
    return push(std::move(out), needs(a), [a](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      const Tensor& y = n.value;
      for (size_t i = 0; i < y.rows(); ++i) {
        double dot = 0.0;
        for (size_t j = 0; j < y.cols(); ++j) dot += n.grad.at(i, j) * y.at(i, j);
        for (size_t j = 0; j < y.cols(); ++j)
          ga.at(i, j) += y.at(i, j) * (n.grad.at(i, j) - dot);
      }
    });
  }

  // Gaussian radial basis of constant inputs d (flattened), with learnable
  // centers mu [B] and widths sigma [B]: out[p,b] = exp(-(d_p-mu_b)^2 / (2 sigma_b^2)).
  VarId rbf_expand(Tensor d, VarId mu, VarId sigma) {
    const size_t p = d.size(), b = val(mu).size();
    require(val(sigma).size() == b, "rbf_expand: center/width length mismatch");
    Tensor out({p, b});
    const Tensor& tmu = val(mu);
    const Tensor& tsg = val(sigma);
    for (size_t i = 0; i < p; ++i)
      for (size_t j = 0; j < b; ++j) {
        double z = (d.data[i] - tmu.data[j]) / tsg.data[j];
        out.at(i, j) = std::exp(-0.5 * z * z);
      }
    return push(std::move(out), needs(mu) || needs(sigma),
                [d = std::move(d), mu, sigma](Tape& t, const Node& n) {
                  const Tensor& tmu = t.val(mu);
                  const Tensor& tsg = t.val(sigma);
                  const size_t p = d.size(), b = tmu.size();
                  Tensor* gmu = t.needs(mu) ? &t.grad_mut(mu) : nullptr;
                  Tensor* gsg = t.needs(sigma) ? &t.grad_mut(sigma) : nullptr;
                  for (size_t i = 0; i < p; ++i)
                    for (size_t j = 0; j < b; ++j) {
                      double diff = d.data[i] - tmu.data[j];
                      double s2 = tsg.data[j] * tsg.data[j];
                      double g = n.grad.at(i, j) * n.value.at(i, j);
                      if (gmu) gmu->data[j] += g * diff / s2;
                      if (gsg) gsg->data[j] += g * diff * diff / (s2 * tsg.data[j]);
                    }
                });
  }

  VarId l2_normalize_rows(VarId a) {
    const Tensor& ta = val(a);
    const size_t m = ta.rows(), n = ta.cols();
    Tensor out({m, n});
    Tensor rnorm({m});
    for (size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (size_t j = 0; j < n; ++j) s += ta.at(i, j) * ta.at(i, j);
      double r = std::sqrt(s);
      require(r > 0.0, "l2_normalize_rows: zero row");
      rnorm.data[i] = 1.0 / r;
      for (size_t j = 0; j < n; ++j) out.at(i, j) = ta.at(i, j) * rnorm.data[i];
    }
    return push(std::move(out), needs(a), [a, rnorm = std::move(rnorm)](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      const Tensor& y = n.value;
      for (size_t i = 0; i < y.rows(); ++i) {
        double dot = 0.0;
        for (size_t j = 0; j < y.cols(); ++j) dot += n.grad.at(i, j) * y.at(i, j);
        for (size_t j = 0; j < y.cols(); ++j)
          ga.at(i, j) += (n.grad.at(i, j) - y.at(i, j) * dot) * rnorm.data[i];
      }
    });
  }

  // ---- reductions / losses ----

  VarId logsumexp_rows(VarId a) {
    const Tensor& ta = val(a);
    const size_t m = ta.rows(), n = ta.cols();
    Tensor out({m});
    Tensor soft({m, n});
    for (size_t i = 0; i < m; ++i) {
      double mx = ta.at(i, 0);
      for (size_t j = 1; j < n; ++j) mx = std::max(mx, ta.at(i, j));
      double denom = 0.0;
      for (size_t j = 0; j < n; ++j) {
        double e = std::exp(ta.at(i, j) - mx);
        soft.at(i, j) = e;
        denom += e;
      }
      out.data[i] = mx + std::log(denom);
      for (size_t j = 0; j < n; ++j) soft.at(i, j) /= denom;
    }
    return push(std::move(out), needs(a), [a, soft = std::move(soft)](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      for (size_t i = 0; i < soft.rows(); ++i)
        for (size_t j = 0; j < soft.cols(); ++j) ga.at(i, j) += n.grad.data[i] * soft.at(i, j);
    });
  }

  VarId diagonal(VarId a) {
    const Tensor& ta = val(a);
    require(ta.rows() == ta.cols(), "diagonal: square matrix expected");
    Tensor out({ta.rows()});
    for (size_t i = 0; i < ta.rows(); ++i) out.data[i] = ta.at(i, i);
    return push(std::move(out), needs(a), [a](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      for (size_t i = 0; i < n.grad.size(); ++i) ga.at(i, i) += n.grad.data[i];
    });
  }

  VarId sum_all(VarId a) {
    const Tensor& ta = val(a);
    double s = 0.0;
    for (double v : ta.data) s += v;
    return push(Tensor::scalar(s), needs(a), [a](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      for (auto& v : ga.data) v += n.grad.data[0];
    });
  }

  VarId mean_all(VarId a) {
    const Tensor& ta = val(a);
    double s = 0.0;
    for (double v : ta.data) s += v;
    const double inv = 1.0 / static_cast<double>(ta.size());
    return push(Tensor::scalar(s * inv), needs(a), [a, inv](Tape& t, const Node& n) {
      Tensor& ga = t.grad_mut(a);
      for (auto& v : ga.data) v += n.grad.data[0] * inv;
    });
  }

  // Mean over rows of (logsumexp(logits_row) - logits_row[target]).
  VarId cross_entropy_mean(VarId logits, std::vector<size_t> targets) {
    const Tensor& tl = val(logits);
    const size_t p = tl.rows(), v = tl.cols();
    require(targets.size() == p, "cross_entropy_mean: target count");
    Tensor soft({p, v});
    double loss = 0.0;
    for (size_t i = 0; i < p; ++i) {
      require(targets[i] < v, "cross_entropy_mean: target id out of range");
      double mx = tl.at(i, 0);
      for (size_t j = 1; j < v; ++j) mx = std::max(mx, tl.at(i, j));
      double denom = 0.0;
      for (size_t j = 0; j < v; ++j) {
        double e = std::exp(tl.at(i, j) - mx);
        soft.at(i, j) = e;
        denom += e;
      }
      loss += mx + std::log(denom) - tl.at(i, targets[i]);
      for (size_t j = 0; j < v; ++j) soft.at(i, j) /= denom;
    }
    loss /= static_cast<double>(p);
    return push(Tensor::scalar(loss), needs(logits),
                [logits, targets = std::move(targets), soft = std::move(soft)](Tape& t,
                                                                               const Node& n) {
                  Tensor& gl = t.grad_mut(logits);
                  const double g = n.grad.data[0] / static_cast<double>(soft.rows());
                  for (size_t i = 0; i < soft.rows(); ++i) {
                    for (size_t j = 0; j < soft.cols(); ++j) gl.at(i, j) += g * soft.at(i, j);
                    gl.at(i, targets[i]) -= g;
                  }
                });
  }

  // sum(mask * (pred - target)^2) / sum(mask); mask and target are constants.
  VarId masked_sq_error_mean(VarId pred, Tensor target, Tensor mask) {
    const Tensor& tp = val(pred);
    require(tp.same_shape(target) && tp.same_shape(mask), "masked_sq_error_mean: shape");
    double msum = 0.0;
    for (double v : mask.data) msum += v;
    require(msum > 0.0, "masked_sq_error_mean: empty mask");
    double loss = 0.0;
    for (size_t i = 0; i < tp.size(); ++i) {
      double d = tp.data[i] - target.data[i];
      loss += mask.data[i] * d * d;
    }
    loss /= msum;
    return push(Tensor::scalar(loss), needs(pred),
                [pred, target = std::move(target), mask = std::move(mask), msum](Tape& t,
                                                                                 const Node& n) {
                  Tensor& gp = t.grad_mut(pred);
                  const Tensor& vp = t.val(pred);
                  const double g = 2.0 * n.grad.data[0] / msum;
                  for (size_t i = 0; i < vp.size(); ++i)
                    gp.data[i] += g * mask.data[i] * (vp.data[i] - target.data[i]);
                });
  }

  VarId select_entries_sum(VarId a, std::vector<std::pair<size_t, size_t>> entries) {
    const Tensor& ta = val(a);
    double s = 0.0;
    for (const auto& [i, j] : entries) s += ta.at(i, j);
    return push(Tensor::scalar(s), needs(a),
                [a, entries = std::move(entries)](Tape& t, const Node& n) {
                  Tensor& ga = t.grad_mut(a);
                  for (const auto& [i, j] : entries) ga.at(i, j) += n.grad.data[0];
                });
  }

  // ---- backward ----

  void backward(VarId root) {
    require(val(root).size() == 1, "backward: root must be a scalar");
    require(needs(root), "backward: root does not depend on any differentiable input");
    for (auto& node : nodes_)
      if (node.requires_grad && node.grad.size() != node.value.size())
        node.grad = Tensor(node.value.shape);
    nodes_[static_cast<size_t>(root)].grad.data[0] = 1.0;
    for (size_t i = nodes_.size(); i-- > 0;) {
      Node& node = nodes_[i];
      if (node.requires_grad && node.back) node.back(*this, node);
    }
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(Tape&, const Node&)> back;
  };

  bool needs(VarId id) const { return nodes_[static_cast<size_t>(id)].requires_grad; }

  Tensor& grad_mut(VarId id) { return nodes_[static_cast<size_t>(id)].grad; }

  void accum(VarId id, const Tensor& g) {
    if (!needs(id)) return;
    Tensor& ga = grad_mut(id);
    for (size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
  }

  void accum_neg(VarId id, const Tensor& g) {
    if (!needs(id)) return;
    Tensor& ga = grad_mut(id);
    for (size_t i = 0; i < g.size(); ++i) ga.data[i] -= g.data[i];
  }

  static void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument("tape: " + msg);
  }

  VarId push(Tensor value, bool requires_grad, std::function<void(Tape&, const Node&)> back) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<VarId>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
};

}  // namespace pocketdex
