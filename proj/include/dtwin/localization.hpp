#pragma once

#include "dtwin/network.hpp"
#include "dtwin/raytrace.hpp"
#include "dtwin/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dtwin {

/// Multipath delay profile: received power per delay bin, linear watts (relative).
struct Mdp {
    std::vector<double> bins;
    double bin_width = 0.0;  // seconds
    std::string ap_id;
    std::size_t dropped = 0;  // paths beyond the delay window

    [[nodiscard]] std::size_t num_bins() const { return bins.size(); }
};

/// OFDM delay resolution 1 / (N delta_f).
inline double default_bin_width(int num_subcarriers, double subcarrier_spacing) {
    return 1.0 / (static_cast<double>(num_subcarriers) * subcarrier_spacing);
}
inline constexpr std::size_t default_num_bins = 64;

Mdp compute_mdp(const PathSet& paths, double bin_width, std::size_t num_bins, std::string ap_id = {});

/// RMS difference of the two profiles after aligning each one's first nonzero bin to index 0 (circular
/// shift) and scaling each to unit total power.
double mdp_distance(const Mdp& a, const Mdp& b);

/// Multiplicative Gaussian perturbation of each bin at the given per-bin SNR; results clamped at zero.
Mdp perturb_mdp(const Mdp& mdp, double snr_db, std::mt19937_64& rng);

struct AccessPoint {
    std::string id;
    Pose pose;
    ArrayConfig array;
};

struct FingerprintBuildParams {
    double spacing = 0.05;  // grid metadata, meters
    double height = 0.0;
    RayTraceOptions tracing;
    double carrier_freq = 2.4e9;
    double bin_width = 12.5e-9;
    std::size_t num_bins = default_num_bins;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct FingerprintDB {
    std::vector<Vec3> points;
    double spacing = 0.0;
    double height = 0.0;
    std::vector<std::string> ap_ids;
    double bin_width = 0.0;
    std::size_t num_bins = 0;
    std::uint64_t scene_hash = 0;
    std::uint64_t network_hash = 0;
    std::vector<double> bins;  // point-major, then AP, then bin

    [[nodiscard]] std::size_t entry_count() const { return points.size() * ap_ids.size(); }
    [[nodiscard]] std::size_t ap_index(const std::string& id) const;
    [[nodiscard]] std::span<const double> profile(std::size_t point, std::size_t ap) const;
    [[nodiscard]] Mdp entry(std::size_t point, std::size_t ap) const;
};

/// Digest of the transmitter configuration a database depends on.
std::uint64_t network_hash(std::span<const AccessPoint> aps, const RayTraceOptions& tracing, double carrier_freq);

/// Fingerprint of one receiver position: trace every AP to it and bin the paths.
std::map<std::string, Mdp> fingerprint_at(const TracingScene& scene, std::span<const AccessPoint> aps,
                                          const Pose& receiver, const FingerprintBuildParams& params);

FingerprintDB build_fingerprint_db(const Scene& scene, std::span<const AccessPoint> aps, std::span<const Vec3> grid,
                                   const FingerprintBuildParams& params);

void write_fingerprint_db(const FingerprintDB& db, const std::filesystem::path& path);
FingerprintDB read_fingerprint_db(const std::filesystem::path& path);
std::string encode_fingerprint_db(const FingerprintDB& db);
FingerprintDB decode_fingerprint_db(std::string_view bytes);

struct LocationEstimate {
    Vec3 position;
    double score = 0.0;
    std::size_t index = 0;
};

/// Nearest-fingerprint matcher with the database profiles aligned and normalized once.
class Localizer {
public:
    explicit Localizer(const FingerprintDB& db);

    [[nodiscard]] LocationEstimate locate(const std::map<std::string, Mdp>& measured) const;

private:
    const FingerprintDB* db_;
    std::vector<double> prepared_;
};

/// Grid point minimizing the unweighted sum of per-AP distances; ties go to the lowest index.
LocationEstimate localize(const std::map<std::string, Mdp>& measured, const FingerprintDB& db);

}  // namespace dtwin
