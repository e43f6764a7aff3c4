#pragma once

#include "dtwin/network.hpp"
#include "dtwin/raytrace.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>

namespace dtwin {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct OfdmParams {
    int num_subcarriers = 1024;  // N
    int num_symbols = 14;        // K
    double subcarrier_spacing = 78.125e3;  // delta f, Hz
    double symbol_duration = 1.0 / 78.125e3;  // T_s, seconds (no cyclic prefix)
    double carrier_freq = 2.4e9;

    /// T_s tied to 1 / delta f.
    static OfdmParams make(int n, int k, double delta_f, double carrier_freq);
};

CVector steering_vector(const ArrayConfig& array, double azimuth, double elevation, double carrier_freq);

/// omega_nk = k nu T_s - n tau delta_f
double phase_shift(int n, int k, double nu, double tau, const OfdmParams& params);

/// H = sum_l b_l exp(j 2 pi omega_nk) a_rx(theta_l) a_tx(psi_l)^T. Angles in the path set are in the
/// terminal body frame; the array boresight is applied here.
CMatrix synthesize_channel(const PathSet& paths, const ArrayConfig& tx_array, const ArrayConfig& rx_array, int n,
                           int k, const OfdmParams& params);

/// Same channel as synthesize_channel, with per-path steering products and phase ramps precomputed for
/// repeated evaluation over a resource grid.
class ChannelSynthesizer {
public:
    ChannelSynthesizer(const PathSet& paths, const ArrayConfig& tx_array, const ArrayConfig& rx_array,
                       const OfdmParams& params);

    [[nodiscard]] CMatrix at(int n, int k) const;
    [[nodiscard]] Eigen::Index rows() const { return rx_steering_.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return tx_steering_.rows(); }

private:
    std::vector<Complex> gains_;
    std::vector<double> delays_;
    std::vector<double> dopplers_;
    CMatrix rx_steering_;  // N_R x L
    CMatrix tx_steering_;  // N_T x L
    OfdmParams params_;
};

struct TxSignal {
    Complex symbol{1.0, 0.0};  // d
    CVector beamformer;        // w, unit norm
    double power = 0.0;        // p, watts
    int occupancy = 1;         // alpha
    CVector x;
};

TxSignal build_tx_signal(Complex d, const CVector& w, double p, int alpha);

/// Unit-energy QPSK point for a two-bit index.
Complex qpsk_symbol(unsigned bits);

/// Circularly symmetric Gaussian receiver noise; white with `variance` unless `covariance` is set.
struct NoiseModel {
    double variance = 0.0;
    std::optional<CMatrix> covariance;
    std::uint64_t seed = 0;
};

struct ChannelKey {
    NodeIndex v;
    NodeIndex q;
    int n;
    int k;
    auto operator<=>(const ChannelKey&) const = default;
};

struct SignalKey {
    NodeIndex q;
    int n;
    int k;
    auto operator<=>(const SignalKey&) const = default;
};

struct ReceiveKey {
    NodeIndex v;
    int n;
    int k;
    auto operator<=>(const ReceiveKey&) const = default;
};

/// y_vnk = sum_{q in E_v} H_vqnk x_qnk + z_nk for every receiver and every (n, k) carrying a signal.
/// Noise is drawn in key order from the seeded generator, so results are reproducible.
std::map<ReceiveKey, CVector> propagate(const NetworkGraph& graph, const std::map<ChannelKey, CMatrix>& channels,
                                        const std::map<SignalKey, TxSignal>& signals, const NoiseModel& noise);

/// Dominant right singular vector of H with the first significant entry rotated to be real positive.
CVector mrt_beamformer(const CMatrix& H);

}  // namespace dtwin
