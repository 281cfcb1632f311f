#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nospread/errors.hpp"
#include "nospread/io.hpp"
#include "nospread/packets.hpp"
#include "support.hpp"

using namespace nospread;
using nospread::ref::uniform;

namespace {

const PhysicalParams unit{};

SpectralWeights zero_weights() { return SpectralWeights(PowerExp{0.0, 0.0, 1.0, 2.0}); }

// Packet integral for unit params straight in q: tanh-sinh copes with the
// sqrt(1 - q) branch point, std:: Bessel supplies J0.
cplx packet_reference(const SpectralWeights& w, double z, double r, double t) {
    const double u = z - t;
    auto part = [&](bool imag) {
        return ref::tanh_sinh(
            [&](double q, double, double db) {
                const double root = std::sqrt(db); // sqrt(1 - q)
                const cplx v = (w.a(q) * std::polar(1.0, (1.0 + root) * u) + w.b(q) * std::polar(1.0, (1.0 - root) * u)) *
                               std::cyl_bessel_j(0.0, std::sqrt(q) * r);
                return imag ? v.imag() : v.real();
            },
            0.0, 1.0, 1.0 / 128.0);
    };
    return {part(false), part(true)};
}

// 2 pi int_{-Z}^{Z} dz int_0^1 brace dq/q for unit params: the z-integral in closed form,
// the q-integral by tanh-sinh.
double window_norm_reference(const SpectralWeights& w, double Z) {
    return 2.0 * std::numbers::pi *
           ref::tanh_sinh(
               [&](double q, double, double db) {
                   const double omega = 2.0 * std::sqrt(db);
                   const cplx a = w.a(q);
                   const cplx b = w.b(q);
                   const double diag = (std::norm(a) + std::norm(b)) * 2.0 * Z;
                   const double cross = omega > 0.0 ? 2.0 * (a * std::conj(b)).real() * 2.0 * std::sin(omega * Z) / omega
                                                    : 2.0 * (a * std::conj(b)).real() * 2.0 * Z;
                   return (diag + cross) / q;
               },
               0.0, 1.0, 1.0 / 256.0, 4.0);
}

} // namespace

TEST(SpectralWeights, Validation) {
    EXPECT_THROW(SpectralWeights(PowerExp{1.0, 0.0, 0.4, 2.0}), ArgumentError);
    EXPECT_THROW(SpectralWeights(PowerExp{1.0, 0.0, 1.0, 0.0}), ArgumentError);
    EXPECT_THROW(SpectralWeights(Tabulated{{0.0}, {0.0}, {0.0}}), ArgumentError);
    EXPECT_THROW(SpectralWeights(Tabulated{{0.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}}), ArgumentError);
    EXPECT_NO_THROW(SpectralWeights(PowerExp{1.0, 0.0, 0.5, 0.1}));
}

TEST(SpectralWeights, TabulatedInterpolatesAndRefusesToExtrapolate) {
    const SpectralWeights w(Tabulated{{0.0, 0.5, 1.0}, {0.0, cplx(1.0, 2.0), 0.0}, {0.0, 1.0, 3.0}});
    EXPECT_EQ(w.a(0.25), cplx(0.5, 1.0));
    EXPECT_EQ(w.b(0.75), cplx(2.0, 0.0));
    EXPECT_EQ(w.b(1.0), cplx(3.0, 0.0));
    EXPECT_THROW((void)w.a(1.01), DomainError);
    EXPECT_THROW((void)w.a(-0.01), DomainError);
    EXPECT_NO_THROW(w.check_window(unit));
    EXPECT_THROW(w.check_window(PhysicalParams{1.0, 2.0, 1.0}), DomainError);
    const SpectralWeights nonzero_at_origin(Tabulated{{0.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}});
    EXPECT_THROW(nonzero_at_origin.check_window(unit), DomainError);
}

TEST(SpectralWeights, TabulatedReproducesPresetPacket) {
    const auto preset = SpectralWeights::preset(1.0, cplx(0.0, 1.0));
    const SpectralWeights table(tabulate_weights(preset, unit, 4001));
    for (double z : {-3.0, 0.0, 2.5}) {
        for (double r : {0.0, 1.0, 4.0}) {
            EXPECT_NEAR(std::abs(eval_packet(unit, table, 128, z, r, 0.0) - eval_packet(unit, preset, 128, z, r, 0.0)),
                        0.0, 1e-7);
        }
    }
}

TEST(EvalPacket, AnalyticValueAtOrigin) {
    const double exact = (1.0 - 3.0 * std::exp(-2.0)) / 4.0;
    const cplx v = eval_packet(unit, SpectralWeights::preset(), 128, 0.0, 0.0, 0.0);
    EXPECT_NEAR(v.real(), exact, 1e-10);
    EXPECT_NEAR(v.imag(), 0.0, 1e-10);
    EXPECT_NEAR(exact, 0.148499, 1e-6);
}

TEST(EvalPacket, MatchesDirectQuadratureOfTheIntegral) {
    std::mt19937_64 gen(21);
    const auto w = SpectralWeights::preset(cplx(0.3, -1.0), cplx(0.7, 0.2));
    const Packet packet(unit, w, 128);
    for (int k = 0; k < 40; ++k) {
        const double z = uniform(gen, -20.0, 20.0);
        const double r = uniform(gen, 0.0, 20.0);
        const double t = uniform(gen, -2.0, 2.0);
        EXPECT_NEAR(std::abs(packet(z, r, t) - packet_reference(w, z, r, t)), 0.0, 1e-11)
            << "z = " << z << " r = " << r << " t = " << t;
    }
}

TEST(EvalPacket, ZeroWeightsGiveZero) {
    EXPECT_EQ(eval_packet(unit, zero_weights(), 64, 1.0, 2.0, 3.0), cplx{});
    const Field f = eval_packet_grid(unit, zero_weights(), 64, {-1.0, 1.0, 5}, {0.0, 1.0, 4}, 0.5);
    for (const auto& v : f.values) {
        EXPECT_EQ(v, cplx{});
    }
}

TEST(EvalPacket, Errors) {
    EXPECT_THROW((void)eval_packet(PhysicalParams{1.0, 0.0, 1.0}, SpectralWeights::preset(), 16, 0, 0, 0),
                 DegenerateSpectrumError);
    EXPECT_THROW((void)eval_packet(unit, SpectralWeights::preset(), 0, 0, 0, 0), ArgumentError);
    EXPECT_THROW((void)eval_packet_grid(unit, SpectralWeights::preset(), 16, {0.0, 1.0, 2}, {0.5, 1.0, 2}, 0.0),
                 ArgumentError);
}

TEST(EvalPacket, GridIsIdenticalToPointwiseCalls) {
    const auto w = SpectralWeights::preset(1.0, cplx(0.5, 0.5));
    const UniformGrid zg{-7.0, 5.0, 23};
    const UniformGrid rg{0.0, 6.0, 13};
    const Field f = eval_packet_grid(unit, w, 96, zg, rg, 0.37);
    for (std::size_t i = 0; i < zg.n; ++i) {
        for (std::size_t j = 0; j < rg.n; ++j) {
            EXPECT_EQ(f.at(i, j), eval_packet(unit, w, 96, zg.at(i), rg.at(j), 0.37));
        }
    }
    const Field one = eval_packet_grid(unit, w, 96, {1.5, 1.5, 1}, {0.0, 0.0, 1}, 0.2);
    ASSERT_EQ(one.values.size(), 1u);
    EXPECT_EQ(one.values[0], eval_packet(unit, w, 96, 1.5, 0.0, 0.2));
}

TEST(EvalPacket, RigidTranslation) {
    std::mt19937_64 gen(22);
    for (int trial = 0; trial < 5; ++trial) {
        const PhysicalParams p{uniform(gen, 0.5, 2.0), uniform(gen, -1.5, 1.5), uniform(gen, 0.5, 2.0)};
        const auto w = SpectralWeights::preset(ref::random_complex(gen), ref::random_complex(gen));
        const Packet packet(p, w, 128);
        for (double t : {0.5, 1.0, 2.0}) {
            const double shift = p.speed * t;
            const Field later = packet.sample({-10.0 + shift, 10.0 + shift, 60}, {0.0, 8.0, 30}, t);
            const Field start = packet.sample({-10.0, 10.0, 60}, {0.0, 8.0, 30}, 0.0);
            double worst = 0.0, scale = 0.0;
            for (std::size_t k = 0; k < later.values.size(); ++k) {
                worst = std::max(worst, std::abs(later.values[k] - start.values[k]));
                scale = std::max(scale, std::abs(start.values[k]));
            }
            EXPECT_LE(worst, 1e-13 * scale) << "t = " << t;
        }
    }
}

TEST(EvalPacket, ModulusProfileShapeInvariant) {
    const Packet packet(unit, SpectralWeights::preset(1.0, 1.0), 128);
    const Field a = packet.sample({-20.0, 20.0, 401}, {0.0, 10.0, 11}, 0.0);
    const Field b = packet.sample({-18.5, 21.5, 401}, {0.0, 10.0, 11}, 1.5);
    for (std::size_t j = 0; j < a.r.n; ++j) {
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < a.z.n; ++i) {
            ma = std::max(ma, std::abs(a.at(i, j)));
            mb = std::max(mb, std::abs(b.at(i, j)));
        }
        EXPECT_NEAR(ma, mb, 1e-12) << "row " << j;
    }
}

TEST(EvalPacket, QuadratureConverges) {
    std::mt19937_64 gen(23);
    for (const auto& w : {SpectralWeights::preset(), SpectralWeights::preset(1.0, 1.0),
                          SpectralWeights(PowerExp{1.0, cplx(0.0, 1.0), 0.5, 1.0})}) {
        const Packet coarse(unit, w, 128);
        const Packet fine(unit, w, 256);
        for (int k = 0; k < 50; ++k) {
            const double z = uniform(gen, -30.0, 30.0);
            const double r = uniform(gen, 0.0, 30.0);
            EXPECT_LT(std::abs(coarse(z, r, 0.0) - fine(z, r, 0.0)), 1e-9);
        }
    }
}

TEST(NormIntegrand, Examples) {
    const auto a_only = SpectralWeights::preset(cplx(0.3, 0.4));
    for (double z : {-50.0, 0.0, 7.0}) {
        const double q = 0.3;
        EXPECT_DOUBLE_EQ(norm_integrand(a_only, unit, z, q), std::norm(a_only.a(q)));
    }
    const SpectralWeights ones(Tabulated{{0.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}});
    EXPECT_DOUBLE_EQ(norm_integrand(ones, unit, 0.0, 0.5), 4.0);
    // |A| = |B|, equal phases, exp(...) = -1: the cross term cancels the rest.
    const double q = 0.75;
    const double z = std::numbers::pi / (2.0 * std::sqrt(1.0 - q));
    EXPECT_NEAR(norm_integrand(ones, unit, z, q), 0.0, 1e-15);
    EXPECT_THROW((void)norm_integrand(ones, unit, 0.0, 0.0), DomainError);
    EXPECT_THROW((void)norm_integrand(ones, unit, 0.0, 1.5), DomainError);
}

TEST(NormIntegrand, DecompositionIdentityAndNonNegativity) {
    std::mt19937_64 gen(24);
    for (int k = 0; k < 10000; ++k) {
        const PhysicalParams p{uniform(gen, 0.5, 2.0), uniform(gen, -2.0, 2.0), uniform(gen, 0.5, 2.0)};
        const double q = p.q_max() * uniform(gen, 1e-6, 1.0);
        // Scale the amplitudes so |A|, |B| stay O(1) at the sampled q; 1e-12 is an absolute bound.
        const double s = uniform(gen, 0.5, 3.0);
        const double beta = uniform(gen, 0.1, 5.0);
        const double profile = std::pow(q, s) * std::exp(-beta * q);
        const auto w = SpectralWeights(
            PowerExp{ref::random_complex(gen) / profile, ref::random_complex(gen) / profile, s, beta});
        const double z = uniform(gen, -100.0, 100.0);
        const double value = norm_integrand(w, p, z, q);
        EXPECT_NEAR(value, ref::norm_integrand_decomposed(w.a(q), w.b(q), p, z, q), 1e-12);
        EXPECT_GE(value, -1e-15);
    }
}

TEST(WindowNorm, ZeroWeightsAndErrors) {
    EXPECT_EQ(window_norm(unit, zero_weights(), 10.0, 64, 64), 0.0);
    EXPECT_THROW((void)window_norm(unit, SpectralWeights::preset(), 0.0, 64, 64), ArgumentError);
    EXPECT_THROW((void)window_norm(unit, SpectralWeights::preset(), -1.0, 64, 64), ArgumentError);
}

TEST(WindowNorm, ExactlyLinearWithoutCrossTerm) {
    const auto w = SpectralWeights::preset(cplx(0.6, 0.8));
    for (double Z : {1.0, 50.0, 400.0}) {
        EXPECT_NEAR(window_norm(unit, w, 2.0 * Z, 128, 64) / window_norm(unit, w, Z, 128, 64), 2.0, 1e-10);
    }
}

TEST(WindowNorm, MatchesClosedFormZIntegral) {
    for (const auto& w : {SpectralWeights::preset(), SpectralWeights::preset(1.0, 1.0),
                          SpectralWeights::preset(cplx(0.2, 1.0), cplx(-0.5, 0.3))}) {
        for (double Z : {5.0, 50.0, 100.0, 400.0}) {
            const double got = window_norm(unit, w, Z, 512, 2048);
            const double want = window_norm_reference(w, Z);
            EXPECT_NEAR(got, want, 1e-9 * want) << "Z = " << Z;
        }
    }
}

TEST(WindowNorm, DoublingRatioAndMonotonicity) {
    const auto w = SpectralWeights::preset(1.0, 1.0);
    double previous = 0.0;
    for (double Z : {50.0, 75.0, 100.0, 150.0, 200.0, 300.0, 400.0}) {
        const double n = window_norm(unit, w, Z, 512, 2048);
        EXPECT_GT(n, previous);
        previous = n;
        if (Z <= 200.0) {
            const double ratio = window_norm(unit, w, 2.0 * Z, 512, 2048) / n;
            EXPECT_GE(ratio, 1.9);
            EXPECT_LE(ratio, 2.1);
        }
    }
}

TEST(NormScan, PresetDivergesLinearly) {
    const std::vector<double> zs{50, 100, 150, 200, 300, 400};
    const auto res = norm_scan(unit, SpectralWeights::preset(1.0, 1.0), zs, 512, 2048);
    EXPECT_GT(res.r_squared, 0.999);
    EXPECT_GT(res.slope, 0.0);
    EXPECT_EQ(res.norms.size(), zs.size());
    for (std::size_t i = 1; i < res.norms.size(); ++i) {
        EXPECT_GE(res.norms[i], res.norms[i - 1]);
    }
    // exceeds any fixed bound: slope * Z dominates
    EXPECT_GT(res.norms.back(), 5.0 * res.norms.front());
}

TEST(NormScan, CrossTermFreeIsExactLine) {
    const auto res = norm_scan(unit, SpectralWeights::preset(), std::vector<double>{10, 20, 35, 80}, 128, 64);
    EXPECT_NEAR(res.r_squared, 1.0, 1e-12);
    EXPECT_GT(res.slope, 0.0);
    EXPECT_NEAR(res.intercept, 0.0, 1e-10 * res.norms.back());
}

TEST(NormScan, ZeroWeightsAndErrors) {
    const auto res = norm_scan(unit, zero_weights(), std::vector<double>{1, 2, 3}, 32, 32);
    EXPECT_EQ(res.slope, 0.0);
    for (double n : res.norms) {
        EXPECT_EQ(n, 0.0);
    }
    EXPECT_THROW((void)norm_scan(unit, zero_weights(), std::vector<double>{1, 2}, 32, 32), ArgumentError);
    EXPECT_THROW((void)norm_scan(unit, zero_weights(), std::vector<double>{1, 3, 2}, 32, 32), ArgumentError);
    EXPECT_THROW((void)norm_scan(unit, zero_weights(), std::vector<double>{-1, 2, 3}, 32, 32), ArgumentError);
}

TEST(FitLine, RecoversExactLine) {
    const std::vector<double> x{1, 2, 4, 8};
    const std::vector<double> y{3.5, 5.5, 9.5, 17.5};
    const auto fit = fit_line(x, y);
    EXPECT_NEAR(fit.slope, 2.0, 1e-14);
    EXPECT_NEAR(fit.intercept, 1.5, 1e-14);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-14);
}

TEST(DirectCylinderNorm, Examples) {
    Field zero({0.0, 1.0, 3}, {0.0, 1.0, 3}, 0.0, unit);
    EXPECT_EQ(direct_cylinder_norm(zero), 0.0);
    Field one({0.0, 1.0, 11}, {0.0, 1.0, 11}, 0.0, unit);
    std::fill(one.values.begin(), one.values.end(), cplx(1.0, 0.0));
    EXPECT_NEAR(direct_cylinder_norm(one), std::numbers::pi, 1e-6);
    Field thin({0.0, 0.0, 1}, {0.0, 1.0, 3}, 0.0, unit);
    EXPECT_THROW((void)direct_cylinder_norm(thin), ArgumentError);
}

TEST(DirectCylinderNorm, SingleModeGrowsLinearlyWithRadius) {
    // r J0(r)^2 -> (2 / pi) cos^2(r - pi/4): the radial integral grows like r_max / pi.
    const Mode mode = Mode::bounded(unit, 1.0, 1.0, 0.0, 1.0);
    auto norm_to = [&](double r_max) {
        const UniformGrid zg{0.0, 1.0, 2};
        const UniformGrid rg{0.0, r_max, static_cast<std::size_t>(r_max / 0.02) + 1};
        Field f(zg, rg, 0.0, unit);
        for (std::size_t i = 0; i < zg.n; ++i) {
            for (std::size_t j = 0; j < rg.n; ++j) {
                f.at(i, j) = eval_mode(unit, mode, zg.at(i), rg.at(j), 0.0);
            }
        }
        return direct_cylinder_norm(f);
    };
    const double n100 = norm_to(100.0);
    const double n200 = norm_to(200.0);
    const double n400 = norm_to(400.0);
    EXPECT_NEAR(n200 / n100, 2.0, 0.02);
    EXPECT_NEAR(n400 / n200, 2.0, 0.02);
    EXPECT_NEAR(n400, 2.0 * std::numbers::pi * 400.0 / std::numbers::pi, 0.01 * n400);
}

TEST(DirectCylinderNorm, PacketSliceConvergesToClosureMeasure) {
    // For B = 0 the radial integral of |Psi|^2 at fixed z is z-independent; over a unit
    // z-window it approaches window_norm(Z = 1/2) with weight 2 dq, deficit ~ 1 / r_max.
    const auto w = SpectralWeights::preset();
    const Packet packet(unit, w, 128);
    const double closure = window_norm(unit, w, 0.5, 256, 16, NormMeasure::Closure);
    const double inverse_q = window_norm(unit, w, 0.5, 256, 16, NormMeasure::InverseQ);
    std::vector<double> deficits;
    for (double r_max : {50.0, 100.0, 200.0}) {
        const Field f = packet.sample({-0.5, 0.5, 2}, {0.0, r_max, static_cast<std::size_t>(r_max / 0.05) + 1}, 0.0);
        const double direct = direct_cylinder_norm(f);
        deficits.push_back(1.0 - direct / closure);
        EXPECT_GT(std::abs(direct / inverse_q - 1.0), 0.1);
    }
    EXPECT_GT(deficits[0], 0.0);
    EXPECT_NEAR(deficits[0] / deficits[1], 2.0, 0.4);
    EXPECT_NEAR(deficits[1] / deficits[2], 2.0, 0.4);
    EXPECT_LT(deficits[2], 0.005);
}
