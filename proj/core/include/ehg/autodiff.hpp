#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace ehg::ad {

/// Reverse-mode tape of scalar operations. Each node has at most two parents
/// with the local partial derivative stored alongside.
class Tape {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t push(std::uint32_t a, double da, std::uint32_t b, double db) {
    nodes_.push_back({a, b, da, db});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  /// Adjoint of every node with respect to node `output`.
  std::vector<double> adjoints(std::uint32_t output) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    adj[output] = 1.0;
    for (std::size_t i = output + 1; i-- > 0;) {
      const double g = adj[i];
      if (g == 0.0) continue;
      const auto& n = nodes_[i];
      if (n.a != kNone) adj[n.a] += n.da * g;
      if (n.b != kNone) adj[n.b] += n.db * g;
    }
    return adj;
  }

  /// The tape new Vars are recorded on, per thread.
  static Tape*& active() {
    thread_local Tape* tape = nullptr;
    return tape;
  }

 private:
  struct Node {
    std::uint32_t a, b;
    double da, db;
  };
  std::vector<Node> nodes_;
};

/// Installs a tape as the active one for the current thread.
class ScopedTape {
 public:
  explicit ScopedTape(Tape& tape) : previous_(Tape::active()) { Tape::active() = &tape; }
  ~ScopedTape() { Tape::active() = previous_; }
  ScopedTape(const ScopedTape&) = delete;
  ScopedTape& operator=(const ScopedTape&) = delete;

 private:
  Tape* previous_;
};

/// Scalar recorded on the active tape. Constructed from a double it is a
/// constant and records nothing.
class Var {
 public:
  Var() = default;
  Var(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  static Var independent(double v) {
    Var x(v);
    x.index_ = Tape::active()->push(Tape::kNone, 0.0, Tape::kNone, 0.0);
    return x;
  }

  double value() const { return value_; }
  std::uint32_t index() const { return index_; }
  bool constant() const { return index_ == Tape::kNone; }

  /// Result of a unary function with local derivative `d`.
  static Var unary(const Var& x, double v, double d) {
    Var r(v);
    if (!x.constant()) r.index_ = Tape::active()->push(x.index_, d, Tape::kNone, 0.0);
    return r;
  }

  static Var binary(const Var& x, double dx, const Var& y, double dy, double v) {
    Var r(v);
    if (x.constant() && y.constant()) return r;
    r.index_ = Tape::active()->push(x.index_, dx, y.index_, dy);
    return r;
  }

  Var& operator+=(const Var& o) { return *this = *this + o; }
  Var& operator-=(const Var& o) { return *this = *this - o; }
  Var& operator*=(const Var& o) { return *this = *this * o; }
  Var& operator/=(const Var& o) { return *this = *this / o; }

  friend Var operator+(const Var& a, const Var& b) {
    return binary(a, 1.0, b, 1.0, a.value_ + b.value_);
  }
  friend Var operator-(const Var& a, const Var& b) {
    return binary(a, 1.0, b, -1.0, a.value_ - b.value_);
  }
  friend Var operator*(const Var& a, const Var& b) {
    return binary(a, b.value_, b, a.value_, a.value_ * b.value_);
  }
  friend Var operator/(const Var& a, const Var& b) {
    const double inv = 1.0 / b.value_;
    return binary(a, inv, b, -a.value_ * inv * inv, a.value_ * inv);
  }
  friend Var operator-(const Var& a) { return unary(a, -a.value_, -1.0); }

  friend bool operator<(const Var& a, const Var& b) { return a.value_ < b.value_; }
  friend bool operator>(const Var& a, const Var& b) { return a.value_ > b.value_; }
  friend bool operator<=(const Var& a, const Var& b) { return a.value_ <= b.value_; }
  friend bool operator>=(const Var& a, const Var& b) { return a.value_ >= b.value_; }

 private:
  double value_ = 0.0;
  std::uint32_t index_ = Tape::kNone;
};

inline Var sqrt(const Var& x) {
  const double s = std::sqrt(x.value());
  return Var::unary(x, s, 0.5 / s);
}
inline Var exp(const Var& x) {
  const double e = std::exp(x.value());
  return Var::unary(x, e, e);
}
inline Var log(const Var& x) { return Var::unary(x, std::log(x.value()), 1.0 / x.value()); }
inline Var tanh(const Var& x) {
  const double t = std::tanh(x.value());
  return Var::unary(x, t, 1.0 - t * t);
}
inline Var atanh(const Var& x) {
  return Var::unary(x, std::atanh(x.value()), 1.0 / (1.0 - x.value() * x.value()));
}
inline Var abs(const Var& x) {
  return Var::unary(x, std::abs(x.value()), x.value() < 0.0 ? -1.0 : 1.0);
}
inline bool isfinite(const Var& x) { return std::isfinite(x.value()); }

inline double value(double x) { return x; }
inline double value(const Var& x) { return x.value(); }

}  // namespace ehg::ad
