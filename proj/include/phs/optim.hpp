#pragma once

#include <cmath>
#include <vector>

#include "phs/encoder.hpp"

namespace phs {

/// Adam with an assignable first-moment decay, so schedules can cycle it as
/// the momentum analogue.
class Adam {
public:
  explicit Adam(const std::vector<Tensor>& params, double beta2 = 0.999,
                double eps = 1e-8)
      : beta2_(beta2), eps_(eps) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& t : params) {
      m_.push_back(Mat::Zero(t.w.rows(), t.w.cols()));
      v_.push_back(Mat::Zero(t.w.rows(), t.w.cols()));
    }
  }

  void step(std::vector<Tensor>& params, double lr, double beta1) {
    if (params.size() != m_.size()) {
      throw TrainError("adam: parameter set changed between steps");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& p = params[i];
      m_[i] = beta1 * m_[i] + (1.0 - beta1) * p.g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.g.cwiseProduct(p.g);
      Mat mhat = m_[i] / bc1;
      Mat vhat = v_[i] / bc2;
      p.w -= lr * mhat.cwiseQuotient((vhat.array().sqrt() + eps_).matrix());
    }
  }

  std::int64_t steps_taken() const { return t_; }

private:
  double beta2_;
  double eps_;
  std::int64_t t_ = 0;
  std::vector<Mat> m_;
  std::vector<Mat> v_;
};

}  // namespace phs
