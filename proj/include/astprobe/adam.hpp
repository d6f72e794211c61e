#pragma once

#include <cmath>

#include "astprobe/probe.hpp"

namespace astprobe {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam over the three parameter blocks of a probe. The learning rate is
/// passed per step so a schedule can change it between epochs.
template <typename T>
class Adam {
 public:
  explicit Adam(const ProbeParams<T>& params, AdamConfig config = {})
      : config_(config),
        first_(ProbeGradient<T>::zeros_like(params)),
        second_(ProbeGradient<T>::zeros_like(params)) {}

  void step(ProbeParams<T>& params, const ProbeGradient<T>& grad, double lr) {
    ++steps_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    update(params.basis, grad.basis, first_.basis, second_.basis, lr, c1, c2);
    update(params.c_protos, grad.c_protos, first_.c_protos, second_.c_protos, lr, c1, c2);
    update(params.u_protos, grad.u_protos, first_.u_protos, second_.u_protos, lr, c1, c2);
  }

  long steps() const { return steps_; }

 private:
  void update(Matrix<T>& param, const Matrix<T>& g, Matrix<T>& m, Matrix<T>& v, double lr,
              double c1, double c2) const {
    const T b1 = static_cast<T>(config_.beta1);
    const T b2 = static_cast<T>(config_.beta2);
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.cwiseProduct(g);
    const T step = static_cast<T>(lr / c1);
    const T root_c2 = static_cast<T>(std::sqrt(c2));
    const T eps = static_cast<T>(config_.epsilon);
    param.array() -= step * m.array() / ((v.array().sqrt() / root_c2) + eps);
  }

  AdamConfig config_;
  ProbeGradient<T> first_;
  ProbeGradient<T> second_;
  long steps_ = 0;
};

}  // namespace astprobe
