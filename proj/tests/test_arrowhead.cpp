#include <cmath>
#include <random>

#include "doctest.h"

#include "fibscat/errors.hpp"
#include "fibscat/fiber.hpp"
#include "fibscat/spectral.hpp"
#include "oracles.hpp"

using namespace fibscat;

namespace {

struct Comparison {
    double value_error = 0.0;
    double gram_error = 0.0;
    double residual = 0.0;
};

Comparison compare_with_oracle(const ArrowheadFiberOperator& op, const EigenDecomposition& eig) {
    const Eigen::MatrixXcd h = oracle::dense(op);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Comparison c;
    const auto values = eig.eigenvalues();
    REQUIRE(values.size() == static_cast<std::size_t>(h.rows()));
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        c.value_error = std::max(c.value_error, std::abs(values[static_cast<std::size_t>(i)] - es.eigenvalues()(i)));
    Eigen::MatrixXcd V(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < h.rows(); ++i) V.col(i) = oracle::vec(eig.eigenvector(static_cast<std::size_t>(i)));
    c.gram_error = (V.adjoint() * V - Eigen::MatrixXcd::Identity(h.rows(), h.cols())).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        c.residual = std::max(c.residual, (h * V.col(i) - values[static_cast<std::size_t>(i)] * V.col(i)).norm());
    return c;
}

}  // namespace

TEST_CASE("secular solver matches dense diagonalization") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const double g = 0.05 + 0.5 * u(rng);
        const double sigma = 0.5 + 1.5 * u(rng);
        const auto m = oracle::gaussian_model(1, g, sigma, DispersionFamily::nonrelativistic,
                                              trial % 2 ? DispersionFamily::relativistic : DispersionFamily::constant);
        const MomentumGrid grid(1, 128, 10.0);
        const double P[] = {trial == 0 ? 0.0 : 2.0 * u(rng) - 1.0};
        const auto op = assemble_fiber(m, grid, P);
        const auto eig = eigendecompose(op);
        CHECK(eig.provenance() == Provenance::secular);
        const auto c = compare_with_oracle(op, eig);
        const double scale = op.scale();
        CHECK(c.value_error <= 1e-10 * scale);
        CHECK(c.gram_error <= 1e-8);
        CHECK(c.residual <= 1e-9 * scale);
    }
}

TEST_CASE("degenerate diagonal entries are deflated exactly") {
    // constant omega at P = 0 makes F_P symmetric in k, so every level is doubly degenerate
    const auto m = oracle::polaron(0.3);
    const MomentumGrid grid(1, 64, 3.0);
    const double P[] = {0.0};
    const auto op = assemble_fiber(m, grid, P);
    const auto eig = eigendecompose(op);
    CHECK(eig.deflated_count() > 0);
    const auto c = compare_with_oracle(op, eig);
    CHECK(c.value_error <= 1e-10 * op.scale());
    CHECK(c.gram_error <= 1e-8);
}

TEST_CASE("zero coupling gives the free spectrum") {
    const auto m = oracle::nelson(0.0);
    const MomentumGrid grid(1, 32, 4.0);
    const double P[] = {0.3};
    const auto op = assemble_fiber(m, grid, P);
    const auto eig = eigendecompose(op);
    std::vector<double> expect(op.diag.begin(), op.diag.end());
    expect.push_back(op.head);
    std::sort(expect.begin(), expect.end());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(eig.eigenvalue(i) == doctest::Approx(expect[i]));
    const FiberState vac(cplx(1.0, 0.0), std::vector<cplx>(grid.size()));
    const auto out = eig.evolve(vac, 3.0);
    CHECK(std::abs(out.vacuum - std::polar(1.0, -3.0 * op.head)) < 1e-14);
    CHECK(norm2(out.field) < 1e-28);
}

TEST_CASE("dense provenance agrees with the secular path") {
    const auto m = oracle::gaussian_model(2, 0.4, 1.0, DispersionFamily::nonrelativistic, DispersionFamily::relativistic);
    const MomentumGrid grid(2, 8, 3.0);
    const double P[] = {0.2, -0.1};
    const auto op = assemble_fiber(m, grid, P, {1e-10, false});
    const auto a = eigendecompose(op);
    const auto b = eigendecompose_dense(op);
    CHECK(b.provenance() == Provenance::dense);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.eigenvalue(i) == doctest::Approx(b.eigenvalue(i)).epsilon(1e-12));
    const auto c = compare_with_oracle(op, a);
    CHECK(c.gram_error <= 1e-8);
}

TEST_CASE("project and synthesize are inverse") {
    const auto m = oracle::nelson(0.3);
    const MomentumGrid grid(1, 256, 8.0);
    const double P[] = {0.4};
    const auto eig = eigendecompose(assemble_fiber(m, grid, P));
    const auto psi = oracle::packet(grid, 1.0, 0.3, 2.0, cplx(0.3, 0.1));
    const auto back = eig.synthesize(eig.project(psi));
    CHECK((back - psi).norm() < 1e-12);
    const auto doubled = eig.apply_function(psi, [](double) { return cplx(2.0, 0.0); });
    CHECK((doubled - cplx(2.0) * psi).norm() < 1e-12);
}

TEST_CASE("time evolution against the matrix exponential") {
    const auto m = oracle::nelson(0.3);
    const MomentumGrid grid(1, 64, 6.0);
    const double P[] = {0.5};
    const auto op = assemble_fiber(m, grid, P);
    const auto eig = eigendecompose(op);
    const auto psi = oracle::packet(grid, 0.8, 0.5, 0.0, cplx(0.5, 0.0));
    const Eigen::MatrixXcd h = oracle::dense(op);
    for (double t : {0.5, 5.0, 40.0}) {
        const Eigen::VectorXcd ref = oracle::propagator(h, t) * oracle::vec(psi);
        const auto got = eig.evolve(psi, t);
        CHECK((oracle::vec(got) - ref).norm() <= 1e-10);
        CHECK(got.norm() == doctest::Approx(psi.norm()).epsilon(1e-12));
    }
}

TEST_CASE("assembly rejects grids that cut off the coupling") {
    const auto m = oracle::nelson(0.3);
    const MomentumGrid grid(1, 64, 1.0);
    const double P[] = {0.0};
    CHECK_THROWS_AS(assemble_fiber(m, grid, P), Error);
    CHECK_NOTHROW(assemble_fiber(m, grid, P, {1e-10, false}));
}
