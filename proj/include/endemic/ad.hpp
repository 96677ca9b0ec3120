#pragma once

#include <Eigen/Core>
#include <functional>
#include <unordered_map>
#include <vector>

namespace endemic::ad {

using Mat = Eigen::MatrixXd;

class Tape;

// Handle to a node owned by a Tape. Cheap to copy.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  const Mat& value() const;
  const Mat& grad() const;
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }
  long rows() const { return value().rows(); }
  long cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape over dense double matrices. One tape per forward pass;
// backward() runs the recorded closures in reverse creation order.
class Tape {
 public:
  using BackFn = std::function<void(Tape&, int)>;

  struct Node {
    Mat value;
    Mat grad;  // empty until touched
    bool requires_grad = false;
    BackFn backward;  // null for leaves
  };

  Var leaf(Mat value, bool requires_grad = false) {
    return push(std::move(value), requires_grad, nullptr);
  }

  Var push(Mat value, bool requires_grad, BackFn backward) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{std::move(value), Mat(), requires_grad,
                          std::move(backward)});
    return Var(this, id);
  }

  const Mat& value(int id) const { return nodes_[id].value; }

  // Gradient accumulator; allocated to zeros on first use.
  Mat& grad(int id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0)
      n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  // Seeds d(out)/d(out) = 1 and propagates. out must be 1x1.
  void backward(const Var& out) {
    grad(out.id())(0, 0) += 1.0;
    for (int i = out.id(); i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.requires_grad || !n.backward || n.grad.size() == 0) continue;
      n.backward(*this, i);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
};

inline const Mat& Var::value() const { return tape_->value(id_); }
inline const Mat& Var::grad() const {
  return const_cast<Tape*>(tape_)->grad(id_);
}

namespace detail {
inline bool rg(const Var& a) { return a.tape()->requires_grad(a.id()); }
inline void acc(Tape& t, int id, const Mat& g) {
  if (t.requires_grad(id)) t.grad(id) += g;
}
}  // namespace detail

inline Var add(const Var& a, const Var& b) {
  Tape& t = *a.tape();
  const int ia = a.id(), ib = b.id();
  return t.push(a.value() + b.value(), detail::rg(a) || detail::rg(b),
                [ia, ib](Tape& t, int out) {
                  detail::acc(t, ia, t.grad(out));
                  detail::acc(t, ib, t.grad(out));
                });
}

inline Var sub(const Var& a, const Var& b) {
  Tape& t = *a.tape();
  const int ia = a.id(), ib = b.id();
  return t.push(a.value() - b.value(), detail::rg(a) || detail::rg(b),
                [ia, ib](Tape& t, int out) {
                  detail::acc(t, ia, t.grad(out));
                  detail::acc(t, ib, -t.grad(out));
                });
}

// Elementwise product.
inline Var mul(const Var& a, const Var& b) {
  Tape& t = *a.tape();
  const int ia = a.id(), ib = b.id();
  return t.push(a.value().cwiseProduct(b.value()),
                detail::rg(a) || detail::rg(b), [ia, ib](Tape& t, int out) {
                  detail::acc(t, ia, t.grad(out).cwiseProduct(t.value(ib)));
                  detail::acc(t, ib, t.grad(out).cwiseProduct(t.value(ia)));
                });
}

inline Var matmul(const Var& a, const Var& b) {
  Tape& t = *a.tape();
  const int ia = a.id(), ib = b.id();
  return t.push(a.value() * b.value(), detail::rg(a) || detail::rg(b),
                [ia, ib](Tape& t, int out) {
                  detail::acc(t, ia, t.grad(out) * t.value(ib).transpose());
                  detail::acc(t, ib, t.value(ia).transpose() * t.grad(out));
                });
}

inline Var transpose(const Var& a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  return t.push(a.value().transpose(), detail::rg(a),
                [ia](Tape& t, int out) {
                  detail::acc(t, ia, t.grad(out).transpose());
                });
}

inline Var scale(const Var& a, double s) {
  Tape& t = *a.tape();
  const int ia = a.id();
  return t.push(a.value() * s, detail::rg(a), [ia, s](Tape& t, int out) {
    detail::acc(t, ia, t.grad(out) * s);
  });
}

inline Var tanh(const Var& a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  return t.push(a.value().array().tanh().matrix(), detail::rg(a),
                [ia](Tape& t, int out) {
                  const Mat& y = t.value(out);
                  detail::acc(t, ia,
                              t.grad(out).cwiseProduct(
                                  (1.0 - y.array().square()).matrix()));
                });
}

inline Var sigmoid(const Var& a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Mat y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return t.push(std::move(y), detail::rg(a), [ia](Tape& t, int out) {
    const Mat& y = t.value(out);
    detail::acc(t, ia,
                t.grad(out).cwiseProduct(
                    (y.array() * (1.0 - y.array())).matrix()));
  });
}

// log(max(x, floor)); gradient is zero where the clamp is active.
inline Var log_clamped(const Var& a, double floor) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Mat y = a.value().array().max(floor).log().matrix();
  return t.push(std::move(y), detail::rg(a), [ia, floor](Tape& t, int out) {
    const Mat& x = t.value(ia);
    Mat d = (x.array() > floor)
                .select(t.grad(out).array() / x.array(), 0.0)
                .matrix();
    detail::acc(t, ia, d);
  });
}

// Softmax of a 1xN row with max-subtraction.
inline Var softmax_row(const Var& a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  const Mat& x = a.value();
  Mat e = (x.array() - x.maxCoeff()).exp().matrix();
  Mat y = e / e.sum();
  return t.push(std::move(y), detail::rg(a), [ia](Tape& t, int out) {
    const Mat& y = t.value(out);
    const Mat& g = t.grad(out);
    const double dot = (g.array() * y.array()).sum();
    detail::acc(t, ia, (y.array() * (g.array() - dot)).matrix());
  });
}

inline Var sum(const Var& a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Mat y(1, 1);
  y(0, 0) = a.value().sum();
  return t.push(std::move(y), detail::rg(a), [ia](Tape& t, int out) {
    const double g = t.grad(out)(0, 0);
    detail::acc(t, ia,
                Mat::Constant(t.value(ia).rows(), t.value(ia).cols(), g));
  });
}

inline Var block(const Var& a, int r0, int c0, int nr, int nc) {
  Tape& t = *a.tape();
  const int ia = a.id();
  return t.push(a.value().block(r0, c0, nr, nc), detail::rg(a),
                [ia, r0, c0, nr, nc](Tape& t, int out) {
                  if (t.requires_grad(ia))
                    t.grad(ia).block(r0, c0, nr, nc) += t.grad(out);
                });
}

inline Var pick(const Var& a, int i, int j) { return block(a, i, j, 1, 1); }

inline Var vconcat(const std::vector<Var>& parts) {
  Tape& t = *parts.front().tape();
  long rows = 0;
  const long cols = parts.front().cols();
  bool rg = false;
  std::vector<int> ids;
  ids.reserve(parts.size());
  for (const auto& p : parts) {
    rows += p.rows();
    rg = rg || detail::rg(p);
    ids.push_back(p.id());
  }
  Mat y(rows, cols);
  long r = 0;
  for (const auto& p : parts) {
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return t.push(std::move(y), rg, [ids](Tape& t, int out) {
    long r = 0;
    for (int id : ids) {
      const long nr = t.value(id).rows();
      detail::acc(t, id, t.grad(out).middleRows(r, nr));
      r += nr;
    }
  });
}

inline Var hconcat(const std::vector<Var>& parts) {
  Tape& t = *parts.front().tape();
  long cols = 0;
  const long rows = parts.front().rows();
  bool rg = false;
  std::vector<int> ids;
  ids.reserve(parts.size());
  for (const auto& p : parts) {
    cols += p.cols();
    rg = rg || detail::rg(p);
    ids.push_back(p.id());
  }
  Mat y(rows, cols);
  long c = 0;
  for (const auto& p : parts) {
    y.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return t.push(std::move(y), rg, [ids](Tape& t, int out) {
    long c = 0;
    for (int id : ids) {
      const long nc = t.value(id).cols();
      detail::acc(t, id, t.grad(out).middleCols(c, nc));
      c += nc;
    }
  });
}

// Row lookup (embedding gather); backward scatter-adds into the table.
inline Var gather_rows(const Var& table, std::vector<int> idx) {
  Tape& t = *table.tape();
  const int it = table.id();
  Mat y(static_cast<long>(idx.size()), table.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    y.row(static_cast<long>(r)) = table.value().row(idx[r]);
  return t.push(std::move(y), detail::rg(table),
                [it, idx = std::move(idx)](Tape& t, int out) {
                  if (!t.requires_grad(it)) return;
                  Mat& g = t.grad(it);
                  for (std::size_t r = 0; r < idx.size(); ++r)
                    g.row(idx[r]) += t.grad(out).row(static_cast<long>(r));
                });
}

// Binds plain matrices to tape leaves, one leaf per distinct matrix address,
// so every use inside a batch shares the same node and gradients accumulate.
class Binder {
 public:
  Binder(Tape& tape, bool with_grad) : tape_(tape), with_grad_(with_grad) {}

  Var operator()(const Mat& m) {
    auto it = cache_.find(&m);
    if (it != cache_.end()) return it->second;
    Var v = tape_.leaf(m, with_grad_);
    cache_.emplace(&m, v);
    return v;
  }

  Var constant(const Mat& m) { return tape_.leaf(m, false); }

  bool bound(const Mat& m) const { return cache_.count(&m) > 0; }

  // Gradient of the bound leaf; zeros if the matrix never entered the graph.
  Mat grad_of(const Mat& m) const {
    auto it = cache_.find(&m);
    if (it == cache_.end()) return Mat::Zero(m.rows(), m.cols());
    return const_cast<Tape&>(tape_).grad(it->second.id());
  }

  Tape& tape() { return tape_; }

 private:
  Tape& tape_;
  bool with_grad_;
  std::unordered_map<const Mat*, Var> cache_;
};

}  // namespace endemic::ad
