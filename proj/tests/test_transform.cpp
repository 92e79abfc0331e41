#include "hermit/io.hpp"
#include "hermit/transform.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <numbers>

using namespace hermit;
using namespace hermit::testing;
using cd = std::complex<double>;

TEST_CASE("alphabets") {
  SUBCASE("phase points are unit modulus and equidistant") {
    const auto pts = Alphabet::phase(8).points();
    REQUIRE(pts.size() == 8);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      CHECK(std::abs(pts[k]) == doctest::Approx(1.0));
      CHECK(std::abs(pts[k] - std::polar(1.0, 2 * std::numbers::pi * k / 8)) < 1e-15);
    }
  }
  SUBCASE("quadrature grid") {
    const auto pts = Alphabet::quadrature(16).points();
    REQUIRE(pts.size() == 16);
    for (const auto p : pts) {
      CHECK((p.real() == -3 || p.real() == -1 || p.real() == 1 || p.real() == 3));
      CHECK((p.imag() == -3 || p.imag() == -1 || p.imag() == 1 || p.imag() == 3));
    }
    double ms = 0.0;
    for (const auto p : pts) ms += std::norm(p);
    CHECK(std::sqrt(ms / 16) == doctest::Approx(Alphabet::quadrature(16).rms()));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(Alphabet::quadrature(8), ConfigError);
    CHECK_THROWS_AS(Alphabet::quadrature(9), ConfigError);
    CHECK_THROWS_AS(Alphabet::phase(1), ConfigError);
    CHECK_NOTHROW(Alphabet::quadrature(64));
  }
}

TEST_CASE("componentwise quantization") {
  SUBCASE("phase AC=4 picks the nearest angle") {
    Eigen::VectorXcd v(1);
    v << cd(1.0, 0.1);
    CHECK(quantize_vector(v, Alphabet::phase(4))(0) == cd(1.0, 0.0));
  }
  SUBCASE("phase ties go to the lower index") {
    const auto alpha = Alphabet::phase(8);
    CHECK(alpha.nearest_index(std::polar(1.0, std::numbers::pi / 8)) == 0);
    CHECK(alpha.nearest_index(std::polar(1.0, 3 * std::numbers::pi / 8)) == 1);
    CHECK(alpha.nearest_index(std::polar(1.0, -std::numbers::pi / 8)) == 0);  // between 7 and 0
  }
  SUBCASE("quadrature per-axis rounding agrees with exhaustive search") {
    Rng rng(5);
    const auto alpha = Alphabet::quadrature(16);
    const auto pts = alpha.points();
    const Eigen::VectorXcd v = random_cvector(rng, 1000);
    const auto q = quantize_vector(v, alpha);
    const double scale = alpha.rms() / std::sqrt(v.squaredNorm() / 1000.0);
    int agree = 0;
    for (Index k = 0; k < v.size(); ++k)
      agree += q(k) == pts[static_cast<std::size_t>(brute_force_nearest(pts, scale * v(k)))];
    CHECK(agree == 1000);
  }
  SUBCASE("phase quantization agrees with exhaustive search") {
    Rng rng(6);
    const auto alpha = Alphabet::phase(16);
    const auto pts = alpha.points();
    const Eigen::VectorXcd v = random_cvector(rng, 1000);
    const auto q = quantize_vector(v, alpha);
    for (Index k = 0; k < v.size(); ++k)
      CHECK(q(k) == pts[static_cast<std::size_t>(brute_force_nearest(pts, v(k)))]);
  }
  SUBCASE("zero vector") {
    CHECK(quantize_vector(Eigen::VectorXcd::Zero(3), Alphabet::phase(4)).norm() == 0.0);
  }
}

TEST_CASE("covariance") {
  SUBCASE("noise only") {
    const auto Cy = covariance(Eigen::MatrixXcd::Zero(3, 2), Eigen::VectorXcd::Ones(3), 1.0, 0.0, 0.7);
    CHECK((Cy - 0.7 * Eigen::MatrixXcd::Identity(3, 3)).norm() == 0.0);
  }
  SUBCASE("two antennas") {
    Eigen::MatrixXcd H(2, 1);
    H << 1, 0;
    Eigen::VectorXcd hJ(2);
    hJ << 0, 1;
    const auto Cy = covariance(H, hJ, 1.0, 1.0, 1.0);
    CHECK((Cy - 2.0 * Eigen::MatrixXcd::Identity(2, 2)).norm() == 0.0);
  }
  SUBCASE("Hermitian positive definite") {
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
      const auto in = random_instance(rng, 6, 3);
      const auto Cy = in.Cy();
      CHECK((Cy - Cy.adjoint()).norm() <= 1e-12 * Cy.norm());
      CHECK(Eigen::LLT<Eigen::MatrixXcd>(Cy).info() == Eigen::Success);
    }
  }
}

TEST_CASE("unconstrained solution") {
  SUBCASE("no jammer gives the identity") {
    Rng rng(8);
    auto in = random_instance(rng, 4, 2);
    in.Ej = 0.0;
    const auto blk = unconstrained_solution(in.Cy(), in.hJ, in.Ej);
    CHECK(blk.a.norm() == 0.0);
    CHECK((blk.dense() - Eigen::MatrixXcd::Identity(4, 4)).norm() == 0.0);
  }
  SUBCASE("scaled identity covariance") {
    const double c = 2.5, Ej = 3.0;
    const Eigen::VectorXcd e1 = Eigen::VectorXcd::Unit(3, 0);
    const auto blk = unconstrained_solution(c * Eigen::MatrixXcd::Identity(3, 3), e1, Ej);
    CHECK(blk.beta == cd(1.0));
    CHECK((blk.b - e1).norm() == 0.0);
    CHECK((blk.a - (Ej / c) * e1).norm() < 1e-15);
  }
  SUBCASE("a^H y is the scalar Wiener estimate of the jammer symbol") {
    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
      const auto in = random_instance(rng, 4, 2);
      const Eigen::MatrixXcd Cy = in.Cy();
      const auto blk = unconstrained_solution(Cy, in.hJ, in.Ej);
      // Wiener row filter Ej hJ^H Cy^-1 via an LU-based inverse
      const Eigen::RowVectorXcd wiener = in.Ej * in.hJ.adjoint() * Cy.fullPivLu().inverse();
      CHECK(max_relative_deviation(blk.a.adjoint(), wiener) < 1e-10);
      // orthogonality principle: E[(s_J - a^H y) y^H] = Ej hJ^H - a^H Cy = 0
      CHECK((in.Ej * in.hJ.adjoint() - blk.a.adjoint() * Cy).norm() < 1e-9 * in.Ej * in.hJ.norm());
    }
  }
  SUBCASE("singular covariance") {
    CHECK_THROWS_AS(unconstrained_solution(Eigen::MatrixXcd::Zero(2, 2), Eigen::VectorXcd::Ones(2), 1.0),
                    NumericalError);
  }
}

TEST_CASE("optimal beta") {
  Rng rng(10);
  SUBCASE("unconstrained pair gives beta = 1") {
    for (int i = 0; i < 20; ++i) {
      const auto in = random_instance(rng, 4, 2);
      const auto Cy = in.Cy();
      const auto blk = unconstrained_solution(Cy, in.hJ, in.Ej);
      CHECK(std::abs(optimal_beta(blk.b, blk.a, Cy, in.hJ, in.Ej) - 1.0) < 1e-10);
    }
  }
  SUBCASE("no jammer") {
    const auto in = random_instance(rng, 4, 2);
    CHECK(optimal_beta(in.hJ, in.hJ, in.Cy(), in.hJ, 0.0) == cd(0.0));
  }
  SUBCASE("degenerate vectors") {
    const auto in = random_instance(rng, 4, 2);
    CHECK(optimal_beta(Eigen::VectorXcd::Zero(4), in.hJ, in.Cy(), in.hJ, in.Ej) == cd(0.0));
    CHECK(optimal_beta(in.hJ, Eigen::VectorXcd::Zero(4), in.Cy(), in.hJ, in.Ej) == cd(0.0));
  }
  SUBCASE("local minimizer for quantized vectors") {
    for (int i = 0; i < 50; ++i) {
      const auto in = random_instance(rng, 4, 2);
      const auto Cy = in.Cy();
      const auto unc = unconstrained_solution(Cy, in.hJ, in.Ej);
      const auto b = quantize_vector(unc.b, Alphabet::quadrature(4));
      const auto a = quantize_vector(unc.a, Alphabet::phase(4));
      const cd beta = optimal_beta(b, a, Cy, in.hJ, in.Ej);
      const double at_opt = jammer_objective(beta, b, a, Cy, in.hJ, in.Ej);
      for (const cd f : {cd(1 + 1e-3), cd(1 - 1e-3), std::polar(1.0, 1e-3), std::polar(1.0, -1e-3)})
        CHECK(jammer_objective(beta * f, b, a, Cy, in.hJ, in.Ej) >= at_opt);
      // beta-optimized closed form agrees with the quadratic at the optimum
      CHECK(optimized_jammer_objective(b, a, Cy, in.hJ, in.Ej) ==
            doctest::Approx(at_opt).epsilon(1e-9).scale(in.Ej * in.hJ.squaredNorm()));
    }
  }
}

TEST_CASE("Cauchy-Schwarz bounds are attained by the unconstrained solution") {
  Rng rng(12);
  const auto in = random_instance(rng, 5, 2);
  const Eigen::MatrixXcd Cy = in.Cy();
  const double b_bound = in.hJ.squaredNorm();
  const double a_bound = std::real(in.hJ.dot(Cy.llt().solve(in.hJ)));
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXcd v = random_cvector(rng, 5).normalized();
    CHECK(std::norm(in.hJ.dot(v)) / v.squaredNorm() <= b_bound * (1 + 1e-12));
    CHECK(std::norm(in.hJ.dot(v)) / std::real(v.dot(Cy * v)) <= a_bound * (1 + 1e-12));
  }
  const auto blk = unconstrained_solution(Cy, in.hJ, in.Ej);
  CHECK(std::norm(in.hJ.dot(blk.b)) / blk.b.squaredNorm() == doctest::Approx(b_bound).epsilon(1e-9));
  CHECK(std::norm(in.hJ.dot(blk.a)) / std::real(blk.a.dot(Cy * blk.a)) == doctest::Approx(a_bound).epsilon(1e-9));
}

TEST_CASE("separability on an exhaustive small alphabet") {
  Rng rng(13);
  const auto alpha = Alphabet::phase(4);
  const auto pts = alpha.points();
  for (int inst = 0; inst < 20; ++inst) {
    const auto in = random_instance(rng, 2, 1);
    const Eigen::MatrixXcd Cy = in.Cy();
    std::vector<Eigen::VectorXcd> cands;
    for (const auto p0 : pts)
      for (const auto p1 : pts) cands.push_back((Eigen::VectorXcd(2) << p0, p1).finished());

    double joint = std::numeric_limits<double>::infinity();
    for (const auto& b : cands)
      for (const auto& a : cands) {
        const cd beta = optimal_beta(b, a, Cy, in.hJ, in.Ej);
        joint = std::min(joint, jammer_objective(beta, b, a, Cy, in.hJ, in.Ej));
      }
    double best_b = 0.0, best_a = 0.0;
    for (const auto& v : cands) {
      best_b = std::max(best_b, std::norm(in.hJ.dot(v)) / v.squaredNorm());
      best_a = std::max(best_a, std::norm(in.hJ.dot(v)) / std::real(v.dot(Cy * v)));
    }
    const double separate = in.Ej * in.hJ.squaredNorm() - in.Ej * in.Ej * best_b * best_a;
    CHECK(separate == doctest::Approx(joint).epsilon(1e-10).scale(in.Ej * in.hJ.squaredNorm()));
  }
}

TEST_CASE("scale of the alphabet is absorbed by beta") {
  Rng rng(14);
  for (int i = 0; i < 20; ++i) {
    const auto in = random_instance(rng, 6, 2);
    const auto Cy = in.Cy();
    const auto unc = unconstrained_solution(Cy, in.hJ, in.Ej);
    TransformBlock<double> blk{{}, quantize_vector(unc.b, Alphabet::quadrature(16)),
                               quantize_vector(unc.a, Alphabet::quadrature(16))};
    blk.beta = optimal_beta(blk.b, blk.a, Cy, in.hJ, in.Ej);
    TransformBlock<double> scaled{{}, 0.37 * blk.b, 5.2 * blk.a};
    scaled.beta = optimal_beta(scaled.b, scaled.a, Cy, in.hJ, in.Ej);
    CHECK(max_relative_deviation(scaled.dense(), blk.dense()) < 1e-12);
  }
}

TEST_CASE("build_transform") {
  Rng rng(15);
  SUBCASE("single unconstrained cluster matches the closed-form projection") {
    const auto in = random_instance(rng, 8, 3);
    const auto T = build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, 8, Alphabet::unconstrained());
    REQUIRE(T.num_clusters() == 1);
    const Eigen::MatrixXcd expected = Eigen::MatrixXcd::Identity(8, 8) -
                                      in.Ej * in.hJ * in.hJ.adjoint() * in.Cy().fullPivLu().inverse();
    CHECK(max_relative_deviation(T.dense(), expected) < 1e-10);
  }
  SUBCASE("256 antennas in clusters of 64") {
    const auto in = random_instance(rng, 256, 8);
    const auto T = build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, 64, Alphabet::quadrature(16));
    CHECK(T.num_clusters() == 4);
    CHECK(T.num_antennas() == 256);
  }
  SUBCASE("phase alphabet entries") {
    const auto in = random_instance(rng, 16, 4);
    const auto T = build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, 4, Alphabet::phase(16));
    const auto pts = Alphabet::phase(16).points();
    for (const auto& blk : T.blocks)
      for (const auto* v : {&blk.b, &blk.a})
        for (Index k = 0; k < v->size(); ++k) {
          CHECK(std::abs((*v)(k)) == doctest::Approx(1.0));
          CHECK(std::abs((*v)(k) - pts[static_cast<std::size_t>(brute_force_nearest(pts, (*v)(k)))]) < 1e-15);
        }
  }
  SUBCASE("cluster size must divide B") {
    const auto in = random_instance(rng, 10, 2);
    CHECK_THROWS_AS(build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, 4, Alphabet::phase(4)), ConfigError);
  }
  SUBCASE("clusters see only their own covariance block") {
    const auto in = random_instance(rng, 8, 3);
    const auto T = build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, 4, Alphabet::unconstrained());
    const Eigen::MatrixXcd Cy = in.Cy();
    const auto blk = unconstrained_solution(Cy.block(4, 4, 4, 4), in.hJ.segment(4, 4), in.Ej);
    CHECK(max_relative_deviation(T.blocks[1].a, blk.a) < 1e-12);
  }
}

TEST_CASE("apply_transform") {
  Rng rng(16);
  SUBCASE("beta = 0 leaves the input unchanged") {
    const auto T = AnalogTransform<double>::identity(6);
    const Eigen::VectorXcd y = random_cvector(rng, 6);
    CHECK(apply_transform(T, y) == y);
  }
  SUBCASE("rank-one path equals the dense product") {
    double worst = 0.0;
    const Alphabet alphabets[] = {Alphabet::unconstrained(), Alphabet::phase(8), Alphabet::quadrature(16)};
    for (int i = 0; i < 1000; ++i) {
      const auto in = random_instance(rng, 8, 2);
      const auto T = build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, i % 2 ? 4 : 8, alphabets[i % 3]);
      const Eigen::VectorXcd y = random_cvector(rng, 8);
      worst = std::max(worst, max_relative_deviation(T.apply(y), T.dense() * y));
    }
    CHECK(worst < 1e-12);
  }
  SUBCASE("jammer direction is suppressed") {
    auto in = random_instance(rng, 8, 2);
    in.N0 = 1e-6;
    const auto T = build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, 8, Alphabet::unconstrained());
    CHECK(T.apply(in.hJ).norm() < 1e-3 * in.hJ.norm());
  }
  SUBCASE("length mismatch") {
    const auto T = AnalogTransform<double>::identity(6);
    CHECK_THROWS_AS(T.apply(random_cvector(rng, 5)), ConfigError);
  }
}

TEST_CASE("residual jammer MSE") {
  Rng rng(17);
  SUBCASE("identity transform leaves all jammer energy") {
    const auto in = random_instance(rng, 6, 2);
    const auto T = AnalogTransform<double>::identity(6);
    CHECK(residual_jammer_mse(T, in.H, in.hJ, in.Es, in.Ej, in.N0) ==
          doctest::Approx(in.Ej * in.hJ.squaredNorm()).epsilon(1e-14));
  }
  SUBCASE("unconstrained optimum beats random candidates") {
    const auto in = random_instance(rng, 4, 2);
    const Eigen::MatrixXcd Cy = in.Cy();
    const auto T = build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, 4, Alphabet::unconstrained());
    const double best = residual_jammer_mse(T, in.H, in.hJ, in.Es, in.Ej, in.N0);
    for (int i = 0; i < 10000; ++i) {
      const Eigen::VectorXcd b = random_cvector(rng, 4), a = random_cvector(rng, 4);
      const cd beta = complex_normal(rng, 1.0);
      CHECK(jammer_objective(beta, b, a, Cy, in.hJ, in.Ej) >= best);
    }
  }
  SUBCASE("Monte Carlo agrees with the closed form") {
    const auto in = random_instance(rng, 8, 3);
    const auto T = build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, 4, Alphabet::quadrature(16));
    const int draws = 100000;
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) {
      const Eigen::VectorXcd s = complex_normal_vector(rng, 3, in.Es);
      const cd sJ = complex_normal(rng, in.Ej);
      const Eigen::VectorXcd y = in.H * s + in.hJ * sJ + complex_normal_vector(rng, 8, in.N0);
      // beta b a^H y = y - P y
      acc += ((y - T.apply(y)) - in.hJ * sJ).squaredNorm();
    }
    CHECK(acc / draws == doctest::Approx(residual_jammer_mse(T, in.H, in.hJ, in.Es, in.Ej, in.N0)).epsilon(0.01));
  }
}

TEST_CASE("transform JSON round trip") {
  Rng rng(18);
  const auto in = random_instance(rng, 8, 2);
  const auto T = build_transform(in.H, in.hJ, in.Es, in.Ej, in.N0, 4, Alphabet::phase(8));
  const auto j = transform_to_json(T);
  CHECK(j.at("alphabet").at("kind") == "pq");
  CHECK(j.at("blocks").size() == 2);
  const auto back = transform_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.alphabet.kind == AlphabetKind::Phase);
  CHECK((back.dense() - T.dense()).norm() == 0.0);
}
