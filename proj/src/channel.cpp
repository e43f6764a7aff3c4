#include "dtwin/channel.hpp"

#include "dtwin/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace dtwin {

namespace {

Complex unit_phasor(double cycles) {
    const double phase = 2.0 * pi * cycles;
    return {std::cos(phase), std::sin(phase)};
}

void check_array(const ArrayConfig& array) {
    if (array.num_elements < 1 || !(array.spacing > 0.0))
        fail(ErrorCode::invalid_argument, "invalid array configuration");
}

void check_frames(const PathSet& paths, const OfdmParams& params) {
    if (paths.carrier_freq != params.carrier_freq)
        fail(ErrorCode::shape_mismatch, "path set was traced at a different carrier frequency");
}

}  // namespace

OfdmParams OfdmParams::make(int n, int k, double delta_f, double carrier_freq) {
    if (n < 1 || k < 1 || !(delta_f > 0.0) || !(carrier_freq > 0.0))
        fail(ErrorCode::invalid_argument, "invalid OFDM parameters");
    return {n, k, delta_f, 1.0 / delta_f, carrier_freq};
}

CVector steering_vector(const ArrayConfig& array, double azimuth, double elevation, double carrier_freq) {
    check_array(array);
    const double projection = std::sin(azimuth) * std::cos(elevation);
    const double lambda = wavelength(carrier_freq);
    CVector a(array.num_elements);
    for (int m = 0; m < array.num_elements; ++m)
        a[m] = unit_phasor(static_cast<double>(m) * array.spacing / lambda * projection);
    return a;
}

double phase_shift(int n, int k, double nu, double tau, const OfdmParams& params) {
    return static_cast<double>(k) * nu * params.symbol_duration -
           static_cast<double>(n) * tau * params.subcarrier_spacing;
}

CMatrix synthesize_channel(const PathSet& paths, const ArrayConfig& tx_array, const ArrayConfig& rx_array, int n,
                           int k, const OfdmParams& params) {
    check_array(tx_array);
    check_array(rx_array);
    CMatrix H = CMatrix::Zero(rx_array.num_elements, tx_array.num_elements);
    if (paths.paths.empty()) return H;
    check_frames(paths, params);
    for (const auto& p : paths.paths) {
        const CVector a_rx =
            steering_vector(rx_array, p.aoa.azimuth - rx_array.boresight, p.aoa.elevation, params.carrier_freq);
        const CVector a_tx =
            steering_vector(tx_array, p.aod.azimuth - tx_array.boresight, p.aod.elevation, params.carrier_freq);
        const Complex c = p.gain * unit_phasor(phase_shift(n, k, p.doppler, p.delay, params));
        H.noalias() += c * (a_rx * a_tx.transpose());
    }
    return H;
}

ChannelSynthesizer::ChannelSynthesizer(const PathSet& paths, const ArrayConfig& tx_array,
                                       const ArrayConfig& rx_array, const OfdmParams& params)
    : params_(params) {
    check_array(tx_array);
    check_array(rx_array);
    if (!paths.paths.empty()) check_frames(paths, params);
    const auto L = static_cast<Eigen::Index>(paths.paths.size());
    rx_steering_.resize(rx_array.num_elements, L);
    tx_steering_.resize(tx_array.num_elements, L);
    for (Eigen::Index l = 0; l < L; ++l) {
        const auto& p = paths.paths[static_cast<std::size_t>(l)];
        rx_steering_.col(l) =
            steering_vector(rx_array, p.aoa.azimuth - rx_array.boresight, p.aoa.elevation, params.carrier_freq);
        tx_steering_.col(l) =
            steering_vector(tx_array, p.aod.azimuth - tx_array.boresight, p.aod.elevation, params.carrier_freq);
        gains_.push_back(p.gain);
        delays_.push_back(p.delay);
        dopplers_.push_back(p.doppler);
    }
}

CMatrix ChannelSynthesizer::at(int n, int k) const {
    CVector c(static_cast<Eigen::Index>(gains_.size()));
    for (std::size_t l = 0; l < gains_.size(); ++l)
        c[static_cast<Eigen::Index>(l)] = gains_[l] * unit_phasor(phase_shift(n, k, dopplers_[l], delays_[l], params_));
    if (c.size() == 0) return CMatrix::Zero(rx_steering_.rows(), tx_steering_.rows());
    return rx_steering_ * c.asDiagonal() * tx_steering_.transpose();
}

TxSignal build_tx_signal(Complex d, const CVector& w, double p, int alpha) {
    if (std::abs(w.norm() - 1.0) > 1e-9) fail(ErrorCode::invalid_argument, "beamformer must have unit norm");
    if (!(p >= 0.0)) fail(ErrorCode::invalid_argument, "transmit power must be nonnegative");
    if (alpha != 0 && alpha != 1) fail(ErrorCode::invalid_argument, "occupancy must be 0 or 1");
    TxSignal s;
    s.symbol = d;
    s.beamformer = w;
    s.power = p;
    s.occupancy = alpha;
    s.x = (static_cast<double>(alpha) * std::sqrt(p) * d) * w;
    return s;
}

Complex qpsk_symbol(unsigned bits) {
    const double a = 1.0 / std::sqrt(2.0);
    return {(bits & 1U) ? -a : a, (bits & 2U) ? -a : a};
}

std::map<ReceiveKey, CVector> propagate(const NetworkGraph& graph, const std::map<ChannelKey, CMatrix>& channels,
                                        const std::map<SignalKey, TxSignal>& signals, const NoiseModel& noise) {
    std::set<std::pair<int, int>> elements;
    for (const auto& [key, s] : signals) {
        if (key.q >= graph.size()) fail(ErrorCode::unknown_node, "signal from unknown transmitter");
        if (s.x.size() != graph.node(key.q).array.num_elements)
            fail(ErrorCode::shape_mismatch, "signal length does not match transmit array of '" +
                                                graph.node(key.q).id + "'");
        elements.emplace(key.n, key.k);
    }

    std::optional<CMatrix> coloring;
    if (noise.covariance) {
        const Eigen::SelfAdjointEigenSolver<CMatrix> eig(*noise.covariance);
        const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        coloring = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().adjoint();
    }
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));

    std::map<ReceiveKey, CVector> out;
    for (NodeIndex v : graph.receivers()) {
        const auto rx_elements = graph.node(v).array.num_elements;
        if (coloring && coloring->rows() != rx_elements)
            fail(ErrorCode::shape_mismatch, "noise covariance does not match receive array of '" + graph.node(v).id + "'");
        const auto sources = incoming_edges(graph, v);
        for (const auto& [n, k] : elements) {
            CVector y = CVector::Zero(rx_elements);
            for (NodeIndex q : sources) {
                const auto s = signals.find({q, n, k});
                if (s == signals.end()) continue;
                const auto h = channels.find({v, q, n, k});
                if (h == channels.end())
                    fail(ErrorCode::missing_channel, "no channel for link " + graph.node(q).id + " -> " +
                                                         graph.node(v).id);
                if (h->second.rows() != rx_elements || h->second.cols() != s->second.x.size())
                    fail(ErrorCode::shape_mismatch, "channel shape does not match link arrays");
                y.noalias() += h->second * s->second.x;
            }
            CVector g(rx_elements);
            for (Eigen::Index i = 0; i < rx_elements; ++i) {
                const double re = normal(rng);
                const double im = normal(rng);
                g[i] = {re, im};
            }
            if (coloring) y.noalias() += *coloring * g;
            else if (noise.variance > 0.0) y += std::sqrt(noise.variance) * g;
            out.emplace(ReceiveKey{v, n, k}, std::move(y));
        }
    }
    return out;
}

CVector mrt_beamformer(const CMatrix& H) {
    if (H.size() == 0 || H.norm() == 0.0) fail(ErrorCode::zero_channel, "MRT needs a nonzero channel");
    CVector w;
    if (H.rows() < H.cols()) {
        const Eigen::SelfAdjointEigenSolver<CMatrix> eig(H * H.adjoint());
        const CVector u = eig.eigenvectors().col(eig.eigenvectors().cols() - 1);
        w = H.adjoint() * u;
    } else {
        const Eigen::SelfAdjointEigenSolver<CMatrix> eig(H.adjoint() * H);
        w = eig.eigenvectors().col(eig.eigenvectors().cols() - 1);
    }
    w.normalize();
    const double largest = w.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (std::abs(w[i]) > 1e-9 * largest) {
            w *= std::conj(w[i]) / std::abs(w[i]);
            w[i] = std::abs(w[i]);
            break;
        }
    }
    return w;
}

}  // namespace dtwin
