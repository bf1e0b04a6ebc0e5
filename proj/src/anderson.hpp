#pragma once

#include <deque>

#include <Eigen/Dense>

namespace transonic::detail {

// Type-II Anderson mixing for x = G(x); depth 0 gives plain Picard.
class AndersonMixer {
public:
    explicit AndersonMixer(int depth) : depth_(depth) {}

    Eigen::VectorXd next(const Eigen::VectorXd& x, const Eigen::VectorXd& gx) {
        const Eigen::VectorXd f = gx - x;
        if (f_prev_.size() > 0 && depth_ > 0) {
            dF_.push_back(f - f_prev_);
            dG_.push_back(gx - g_prev_);
            if (static_cast<int>(dF_.size()) > depth_) {
                dF_.pop_front();
                dG_.pop_front();
            }
        }
        f_prev_ = f;
        g_prev_ = gx;
        if (dF_.empty()) return gx;
        const auto m = static_cast<Eigen::Index>(dF_.size());
        Eigen::MatrixXd F(f.size(), m), G(f.size(), m);
        for (Eigen::Index i = 0; i < m; ++i) {
            F.col(i) = dF_[static_cast<std::size_t>(i)];
            G.col(i) = dG_[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXd gamma = F.completeOrthogonalDecomposition().solve(f);
        return gx - G * gamma;
    }

    void reset() {
        dF_.clear();
        dG_.clear();
        f_prev_.resize(0);
        g_prev_.resize(0);
    }

private:
    int depth_;
    std::deque<Eigen::VectorXd> dF_, dG_;
    Eigen::VectorXd f_prev_, g_prev_;
};

}  // namespace transonic::detail
