#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jumpbsde/oracle.hpp"

namespace jumpbsde {

namespace {

// coefficients of the degree-13 Pade numerator for exp
constexpr double kPade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                              1187353796428800.0,  129060195264000.0,   10559470521600.0,
                              670442572800.0,      33522128640.0,       1323241920.0,
                              40840800.0,          960960.0,            16380.0,
                              182.0,               1.0};

}  // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exponential: square input");
    const auto n = m.rows();
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();  // induced infinity norm
    if (norm == 0.0) return Eigen::MatrixXd::Identity(n, n);
    // theta_13 from the standard scaling analysis
    int squarings = 0;
    if (norm > 5.371920351148152)
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 5.371920351148152))));
    const Eigen::MatrixXd a = m / std::pow(2.0, squarings);

    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd a2 = a * a;
    const Eigen::MatrixXd a4 = a2 * a2;
    const Eigen::MatrixXd a6 = a4 * a2;
    const Eigen::MatrixXd u =
        a * (a6 * (kPade13[13] * a6 + kPade13[11] * a4 + kPade13[9] * a2) + kPade13[7] * a6 +
             kPade13[5] * a4 + kPade13[3] * a2 + kPade13[1] * id);
    const Eigen::MatrixXd v = a6 * (kPade13[12] * a6 + kPade13[10] * a4 + kPade13[8] * a2) +
                              kPade13[6] * a6 + kPade13[4] * a4 + kPade13[2] * a2 + kPade13[0] * id;

    Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) r = r * r;
    return r;
}

std::vector<double> backward_rk4_v(const GeneratorMatrix& gen, const std::vector<double>& terminal,
                                   double t, double horizon, int n_steps) {
    const auto n = gen.q.rows();
    if (static_cast<std::size_t>(n) != terminal.size())
        throw std::invalid_argument("backward_rk4_v: terminal size mismatch");
    if (t > horizon) throw std::invalid_argument("backward_rk4_v: t past the horizon");
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(terminal.data(), n);
    const double dt = (horizon - t) / n_steps;
    // integrate v' = -Q v backwards from T, i.e. w(s) = v(T - s), w' = Q w
    for (int k = 0; k < n_steps; ++k) {
        const Eigen::VectorXd k1 = gen.q * v;
        const Eigen::VectorXd k2 = gen.q * (v + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = gen.q * (v + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = gen.q * (v + dt * k3);
        v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return std::vector<double>(v.data(), v.data() + n);
}

MatexpReport matrix_exponential_v(const GeneratorMatrix& gen, const std::vector<double>& terminal,
                                  double t, double horizon) {
    const auto n = gen.q.rows();
    if (gen.q.cols() != n) throw std::invalid_argument("matrix_exponential_v: square generator");
    if (static_cast<std::size_t>(n) != terminal.size())
        throw std::invalid_argument("matrix_exponential_v: terminal size mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && gen.q(i, j) < 0.0)
                throw std::invalid_argument("matrix_exponential_v: negative off-diagonal rate");
        if (std::abs(gen.q.row(i).sum()) > 1e-12)
            throw std::invalid_argument("matrix_exponential_v: generator rows must sum to zero");
    }

    MatexpReport rep;
    const Eigen::MatrixXd p = matrix_exponential(gen.q * (horizon - t));
    rep.row_sum_error = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(terminal.data(), n);
    const Eigen::VectorXd v = p * g;
    rep.v0.assign(v.data(), v.data() + n);

    const std::vector<double> rk4 = backward_rk4_v(gen, terminal, t, horizon, 4000);
    for (Eigen::Index i = 0; i < n; ++i)
        rep.rk4_cross_check = std::max(rep.rk4_cross_check, std::abs(rep.v0[i] - rk4[i]));
    rep.pass = rep.row_sum_error <= 1e-12 && rep.rk4_cross_check <= 1e-8;
    return rep;
}

}  // namespace jumpbsde
