#pragma once

#include <cmath>
#include <vector>

#include "linkforge/nn/graph.hpp"

namespace linkforge::nn {

// Adaptive-moment update over every ParamStore entry, registration order.
// step() consumes the accumulated gradients and zeroes them.
class Adam {
public:
    Adam(ParamStore& params, double lr) : params_(&params), lr_(lr) {
        for (const auto& [name, t] : params.entries()) {
            m_.emplace_back(t->size(), 0.0);
            v_.emplace_back(t->size(), 0.0);
        }
    }

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }
    int steps() const { return t_; }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(kBeta1, t_);
        const double bc2 = 1.0 - std::pow(kBeta2, t_);
        size_t gi = 0;
        for (const auto& [name, t] : params_->entries()) {
            std::vector<double>& m = m_[gi];
            std::vector<double>& v = v_[gi];
            ++gi;
            for (size_t i = 0; i < t->size(); ++i) {
                const double g = t->g[i];
                m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
                v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
                t->v[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
                t->g[i] = 0.0;
            }
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    ParamStore* params_;
    double lr_;
    int t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace linkforge::nn
