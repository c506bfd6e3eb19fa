#include "jumpbsde/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace jumpbsde {

Eigen::VectorXd Basis::eval(double x) const {
    Eigen::VectorXd out(size());
    for (int i = 0; i < size(); ++i) out[i] = fns[i](x);
    return out;
}

Eigen::MatrixXd Basis::design(const std::vector<double>& xs) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), size());
    for (std::size_t r = 0; r < xs.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = eval(xs[r]);
    return out;
}

Basis polynomial_basis(int degree) {
    if (degree < 0) throw std::invalid_argument("polynomial_basis: negative degree");
    Basis b;
    b.name = "poly" + std::to_string(degree);
    for (int d = 0; d <= degree; ++d)
        b.fns.push_back([d](double x) { return std::pow(x, d); });
    return b;
}

Basis indicator_basis(std::vector<double> states, double tol) {
    if (states.empty()) throw std::invalid_argument("indicator_basis: no states");
    Basis b;
    b.name = "indicator" + std::to_string(states.size());
    for (double s : states)
        b.fns.push_back([s, tol](double x) { return std::abs(x - s) <= tol ? 1.0 : 0.0; });
    return b;
}

Basis interval_basis(std::vector<double> edges) {
    if (edges.size() < 2) throw std::invalid_argument("interval_basis: need at least one interval");
    Basis b;
    b.name = "intervals" + std::to_string(edges.size() - 1);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double lo = edges[i], hi = edges[i + 1];
        const bool last = (i + 2 == edges.size());
        b.fns.push_back([lo, hi, last](double x) {
            return (x >= lo && (x < hi || (last && x <= hi))) ? 1.0 : 0.0;
        });
    }
    return b;
}

Eigen::VectorXd Basis2::eval(double x, double e) const {
    const Eigen::VectorXd bx = state.eval(x);
    const Eigen::VectorXd be = mark.eval(e);
    Eigen::VectorXd out(size());
    int idx = 0;
    for (int i = 0; i < bx.size(); ++i)
        for (int j = 0; j < be.size(); ++j) out[idx++] = bx[i] * be[j];
    return out;
}

LsFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("least_squares: shape mismatch");
    if (X.rows() == 0) throw std::invalid_argument("least_squares: empty sample");
    LsFit fit;
    // Columns with no support (all zero within roundoff) are excluded and
    // their coefficients pinned to 0, so indicator bases tolerate unvisited
    // states.
    std::vector<Eigen::Index> live;
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        if (X.col(c).cwiseAbs().maxCoeff() > 0.0) live.push_back(c);
    fit.dropped_columns = static_cast<int>(X.cols() - static_cast<Eigen::Index>(live.size()));
    fit.coeffs = Eigen::VectorXd::Zero(X.cols());
    if (live.empty()) return fit;
    Eigen::MatrixXd Xl(X.rows(), static_cast<Eigen::Index>(live.size()));
    for (std::size_t i = 0; i < live.size(); ++i) Xl.col(static_cast<Eigen::Index>(i)) = X.col(live[i]);
    // The threshold must be in place before compute(): solve() truncates at
    // the pivot count found during factorization, not at rank().
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(1e-10);
    cod.compute(Xl);
    fit.rank = static_cast<int>(cod.rank());
    const Eigen::VectorXd sol = cod.solve(y);
    for (std::size_t i = 0; i < live.size(); ++i) fit.coeffs[live[i]] = sol[static_cast<Eigen::Index>(i)];
    return fit;
}

}  // namespace jumpbsde
