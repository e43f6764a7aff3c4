#include "../oracles/channel_oracle.hpp"
#include "../support.hpp"
#include "dtwin/channel.hpp"
#include "dtwin/error.hpp"

#include <doctest.h>

#include <random>

using namespace dtwin;

namespace {

PropagationPath ray(Complex b, double tau, double nu, double aoa, double aod) {
    PropagationPath p;
    p.gain = b;
    p.delay = tau;
    p.doppler = nu;
    p.aoa = {aoa, 0.1};
    p.aod = {aod, -0.2};
    return p;
}

double rel_err(const CMatrix& H, const std::vector<std::vector<std::complex<double>>>& ref) {
    double num = 0, den = 0;
    for (Eigen::Index i = 0; i < H.rows(); ++i)
        for (Eigen::Index j = 0; j < H.cols(); ++j) {
            num += std::norm(H(i, j) - ref[i][j]);
            den += std::norm(ref[i][j]);
        }
    return std::sqrt(num / den);
}

NetworkGraph star(int nt, int nr, int sources) {
    std::vector<NodeDescriptor> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    NodeDescriptor rx;
    rx.id = "rx";
    rx.roles = {false, true, false};
    rx.array = half_wavelength_array(nr, 2.4e9);
    nodes.push_back(rx);
    for (int q = 0; q < sources; ++q) {
        NodeDescriptor tx;
        tx.id = "tx" + std::to_string(q);
        tx.roles = {true, false, false};
        tx.array = half_wavelength_array(nt, 2.4e9);
        nodes.push_back(tx);
        edges.emplace_back(tx.id, "rx");
    }
    return build_network(nodes, edges);
}

}  // namespace

TEST_CASE("steering vectors") {
    const ArrayConfig ula = half_wavelength_array(4, 2.4e9);
    const CVector broadside = steering_vector(ula, 0.0, 0.0, 2.4e9);
    for (Eigen::Index m = 0; m < broadside.size(); ++m) CHECK(std::abs(broadside[m] - Complex(1, 0)) < 1e-15);

    const CVector a = steering_vector(half_wavelength_array(2, 2.4e9), pi / 6, 0.0, 2.4e9);
    CHECK(std::abs(a[0] - Complex(1, 0)) < 1e-15);
    CHECK(std::abs(a[1] - Complex(0, 1)) < 1e-12);

    const CVector b = steering_vector(half_wavelength_array(8, 2.4e9), 0.7, 0.3, 2.4e9);
    for (Eigen::Index m = 0; m < b.size(); ++m) CHECK(std::abs(b[m]) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("phase shift hand values") {
    const OfdmParams p = OfdmParams::make(1024, 14, 78.125e3, 2.4e9);
    CHECK(p.symbol_duration == doctest::Approx(12.8e-6).epsilon(1e-15));
    CHECK(phase_shift(5, 3, 0.0, 0.0, p) == 0.0);
    CHECK(phase_shift(0, 1, 100.0, 0.0, p) == doctest::Approx(1.28e-3).epsilon(1e-12));
    CHECK(phase_shift(1, 0, 0.0, 12.5e-9, p) == doctest::Approx(-9.765625e-4).epsilon(1e-12));
}

TEST_CASE("channel synthesis special cases") {
    const OfdmParams p = OfdmParams::make(8, 2, 78.125e3, 2.4e9);
    const ArrayConfig one = half_wavelength_array(1, 2.4e9);
    PathSet empty;
    empty.carrier_freq = p.carrier_freq;
    CHECK(synthesize_channel(empty, one, one, 1, 1, p).norm() == 0.0);

    PathSet single;
    single.carrier_freq = p.carrier_freq;
    single.paths.push_back(ray({0.3, -0.2}, 20e-9, 35.0, 0.4, -0.9));
    const CMatrix H = synthesize_channel(single, one, one, 3, 2, p);
    const Complex expected = Complex(0.3, -0.2) * std::exp(Complex(0, 2 * pi * phase_shift(3, 2, 35.0, 20e-9, p)));
    CHECK(std::abs(H(0, 0) - expected) < 1e-15);

    PathSet other = single;
    other.carrier_freq = 5e9;
    CHECK_THROWS_AS(synthesize_channel(other, one, one, 1, 1, p), Error);
}

TEST_CASE("channel synthesis matches term-by-term evaluation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    const OfdmParams p = OfdmParams::make(8, 2, 78.125e3, 2.4e9);
    const ArrayConfig tx{2, 0.06, 0.3};
    const ArrayConfig rx{2, 0.05, -0.2};
    PathSet ps;
    ps.carrier_freq = p.carrier_freq;
    std::vector<oracle::RayTerm> terms;
    for (int l = 0; l < 3; ++l) {
        PropagationPath r = ray({u(rng), u(rng)}, 50e-9 * (1 + u(rng)), 50 * u(rng), pi * u(rng), pi * u(rng));
        r.aoa.elevation = 0.5 * u(rng);
        r.aod.elevation = 0.5 * u(rng);
        terms.push_back({r.gain, r.delay, r.doppler, r.aoa.azimuth, r.aoa.elevation, r.aod.azimuth, r.aod.elevation});
        ps.paths.push_back(r);
    }
    const ChannelSynthesizer synth(ps, tx, rx, p);
    for (int n = 0; n < 8; ++n)
        for (int k = 0; k < 2; ++k) {
            const auto ref = oracle::channel(terms, {2, 0.06, 0.3}, {2, 0.05, -0.2}, n, k, p.subcarrier_spacing, p.carrier_freq);
            CHECK(rel_err(synthesize_channel(ps, tx, rx, n, k, p), ref) <= 1e-12);
            CHECK(rel_err(synth.at(n, k), ref) <= 1e-12);
        }
}

TEST_CASE("transmit signal construction") {
    CVector e1 = CVector::Zero(3);
    e1[0] = 1.0;
    const TxSignal s = build_tx_signal({1, 0}, e1, 4.0, 1);
    CHECK(std::abs(s.x[0] - Complex(2, 0)) < 1e-15);
    CHECK(s.x.tail(2).norm() == 0.0);
    CHECK(build_tx_signal({1, 0}, e1, 4.0, 0).x.norm() == 0.0);
    const TxSignal q = build_tx_signal(qpsk_symbol(3), CVector::Constant(4, 0.5), 0.7, 1);
    CHECK(q.x.squaredNorm() == doctest::Approx(0.7).epsilon(1e-14));
    CHECK_THROWS_AS(build_tx_signal({1, 0}, CVector::Constant(2, 1.0), 1.0, 1), Error);
    CHECK_THROWS_AS(build_tx_signal({1, 0}, e1, -1.0, 1), Error);
    CHECK_THROWS_AS(build_tx_signal({1, 0}, e1, 1.0, 2), Error);
    for (unsigned b = 0; b < 4; ++b) CHECK(std::abs(qpsk_symbol(b)) == doctest::Approx(1.0));
}

TEST_CASE("propagate superposes incoming links") {
    const NetworkGraph g = star(2, 2, 2);
    const CMatrix H1 = (CMatrix(2, 2) << Complex(1, 0), Complex(0, 1), Complex(0.5, 0), Complex(-1, 0)).finished();
    const CMatrix H2 = (CMatrix(2, 2) << Complex(0, 0), Complex(2, 0), Complex(1, 1), Complex(0, 0)).finished();
    CVector w(2);
    w << Complex(1, 0), Complex(0, 1);
    w.normalize();
    std::map<ChannelKey, CMatrix> channels{{{0, 1, 1, 1}, H1}, {{0, 2, 1, 1}, H2}};
    std::map<SignalKey, TxSignal> signals{{{1, 1, 1}, build_tx_signal({1, 0}, w, 1.0, 1)}};
    NoiseModel quiet;
    auto y = propagate(g, channels, signals, quiet);
    REQUIRE(y.size() == 1);
    CHECK((y.at({0, 1, 1}) - H1 * signals.at({1, 1, 1}).x).norm() == 0.0);

    signals.emplace(SignalKey{2, 1, 1}, build_tx_signal({0, 1}, w, 2.0, 1));
    y = propagate(g, channels, signals, quiet);
    const CVector x1 = signals.at({1, 1, 1}).x;
    const CVector x2 = signals.at({2, 1, 1}).x;
    for (int i = 0; i < 2; ++i) {
        Complex sum = 0;
        for (int j = 0; j < 2; ++j) sum += H1(i, j) * x1[j] + H2(i, j) * x2[j];
        CHECK(std::abs(y.at({0, 1, 1})[i] - sum) < 1e-14);
    }

    channels.erase({0, 2, 1, 1});
    CHECK_THROWS_AS(propagate(g, channels, signals, quiet), Error);
}

TEST_CASE("receiver with no active sources hears noise only, reproducibly") {
    const NetworkGraph g = star(1, 2, 1);
    std::map<ChannelKey, CMatrix> channels{{{0, 1, 1, 1}, CMatrix::Zero(2, 1)}};
    std::map<SignalKey, TxSignal> signals{{{1, 1, 1}, build_tx_signal({1, 0}, CVector::Ones(1), 1.0, 0)}};
    NoiseModel noise{1e-3, std::nullopt, 99};
    const auto y1 = propagate(g, channels, signals, noise);
    const auto y2 = propagate(g, channels, signals, noise);
    CHECK(y1.at({0, 1, 1}).norm() > 0.0);
    CHECK((y1.at({0, 1, 1}) - y2.at({0, 1, 1})).norm() == 0.0);
}

TEST_CASE("noise statistics match the configured variance") {
    const NetworkGraph g = star(1, 1, 1);
    std::map<ChannelKey, CMatrix> channels;
    std::map<SignalKey, TxSignal> signals;
    for (int n = 1; n <= 4000; ++n) {
        channels.emplace(ChannelKey{0, 1, n, 1}, CMatrix::Zero(1, 1));
        signals.emplace(SignalKey{1, n, 1}, build_tx_signal({1, 0}, CVector::Ones(1), 1.0, 1));
    }
    const auto y = propagate(g, channels, signals, NoiseModel{2.0, std::nullopt, 5});
    double power = 0;
    for (const auto& [k, v] : y) power += std::norm(v[0]);
    CHECK(power / 4000 == doctest::Approx(2.0).epsilon(0.08));
}

TEST_CASE("MRT beamformer") {
    CMatrix h(1, 3);
    h << Complex(1, 1), Complex(0, -2), Complex(0.5, 0);
    const CVector w = mrt_beamformer(h);
    const CVector ref = h.adjoint() / h.norm();
    // equal up to a unit phase
    const Complex phase = ref.dot(w);
    CHECK(std::abs(phase) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w[0].imag() == doctest::Approx(0.0));
    CHECK(w[0].real() > 0.0);

    CMatrix e = CMatrix::Zero(3, 3);
    e(0, 0) = 1.0;
    const CVector we = mrt_beamformer(e);
    CHECK(std::abs(we[0] - Complex(1, 0)) < 1e-12);
    CHECK(we.tail(2).norm() < 1e-12);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    CMatrix H(2, 4);
    for (Eigen::Index i = 0; i < H.size(); ++i) H(i) = {g(rng), g(rng)};
    const CVector wm = mrt_beamformer(H);
    CHECK(wm.norm() == doctest::Approx(1.0).epsilon(1e-14));
    const double best = (H * wm).norm();
    for (int t = 0; t < 1000; ++t) {
        CVector u(4);
        for (Eigen::Index i = 0; i < 4; ++i) u[i] = {g(rng), g(rng)};
        u.normalize();
        CHECK((H * u).norm() <= best + 1e-12);
    }
    CHECK_THROWS_AS(mrt_beamformer(CMatrix::Zero(2, 2)), Error);
}
