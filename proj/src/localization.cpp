#include "dtwin/localization.hpp"

#include "dtwin/error.hpp"
#include "dtwin/hash.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace dtwin {

namespace {

void check_bins(double bin_width, std::size_t num_bins) {
    if (!(bin_width > 0.0) || num_bins < 1) fail(ErrorCode::invalid_argument, "invalid MDP bin parameters");
}

// Aligned, unit-power copy of a profile.
void prepare(std::span<const double> bins, std::span<double> out) {
    const std::size_t n = bins.size();
    std::size_t first = 0;
    while (first < n && bins[first] == 0.0) ++first;
    double total = 0.0;
    for (double b : bins) total += b;
    for (std::size_t j = 0; j < n; ++j) out[j] = total > 0.0 ? bins[(j + first) % n] / total : 0.0;
}

double rms_difference(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

constexpr char magic[8] = {'D', 'T', 'W', 'F', 'P', 'D', 'B', '\0'};
constexpr std::uint32_t format_version = 1;

class Writer {
public:
    void u32(std::uint32_t v) { raw(v, 4); }
    void u64(std::uint64_t v) { raw(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_ += s;
    }
    void bytes(const char* p, std::size_t n) { out_.append(p, n); }
    std::string take() { return std::move(out_); }

private:
    void raw(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
    }
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
    std::uint64_t u64() { return raw(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::string_view view(std::size_t n) {
        need(n);
        const auto v = in_.substr(pos_, n);
        pos_ += n;
        return v;
    }
    [[nodiscard]] bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) fail(ErrorCode::parse, "truncated fingerprint database");
    }
    std::uint64_t raw(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

}  // namespace

Mdp compute_mdp(const PathSet& paths, double bin_width, std::size_t num_bins, std::string ap_id) {
    check_bins(bin_width, num_bins);
    Mdp mdp;
    mdp.bins.assign(num_bins, 0.0);
    mdp.bin_width = bin_width;
    mdp.ap_id = std::move(ap_id);
    for (const auto& p : paths.paths) {
        const double index = std::floor(p.delay / bin_width);
        if (index < 0.0 || index >= static_cast<double>(num_bins)) {
            ++mdp.dropped;
            continue;
        }
        mdp.bins[static_cast<std::size_t>(index)] += std::norm(p.gain);
    }
    return mdp;
}

double mdp_distance(const Mdp& a, const Mdp& b) {
    if (a.bin_width != b.bin_width || a.num_bins() != b.num_bins())
        fail(ErrorCode::bin_mismatch, "MDP bin parameters differ");
    check_bins(a.bin_width, a.num_bins());
    std::vector<double> pa(a.num_bins());
    std::vector<double> pb(b.num_bins());
    prepare(a.bins, pa);
    prepare(b.bins, pb);
    return rms_difference(pa, pb);
}

Mdp perturb_mdp(const Mdp& mdp, double snr_db, std::mt19937_64& rng) {
    Mdp out = mdp;
    // Bins hold power, so the SNR is a power ratio: sigma = bin * 10^(-snr/10).
    const double relative_sigma = std::pow(10.0, -snr_db / 10.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& b : out.bins) {
        const double e = normal(rng);
        b = std::max(0.0, b + relative_sigma * b * e);
    }
    return out;
}

std::size_t FingerprintDB::ap_index(const std::string& id) const {
    const auto it = std::find(ap_ids.begin(), ap_ids.end(), id);
    if (it == ap_ids.end()) fail(ErrorCode::unknown_ap, "access point '" + id + "' not in database");
    return static_cast<std::size_t>(it - ap_ids.begin());
}

std::span<const double> FingerprintDB::profile(std::size_t point, std::size_t ap) const {
    return std::span<const double>(bins).subspan((point * ap_ids.size() + ap) * num_bins, num_bins);
}

Mdp FingerprintDB::entry(std::size_t point, std::size_t ap) const {
    const auto p = profile(point, ap);
    return Mdp{{p.begin(), p.end()}, bin_width, ap_ids.at(ap), 0};
}

std::uint64_t network_hash(std::span<const AccessPoint> aps, const RayTraceOptions& tracing, double carrier_freq) {
    nlohmann::json doc;
    doc["carrier_freq"] = carrier_freq;
    doc["max_order"] = tracing.max_order;
    doc["min_gain"] = tracing.min_gain;
    for (const auto& ap : aps) {
        const auto& p = ap.pose;
        doc["aps"].push_back({{"id", ap.id},
                              {"position", {p.position.x(), p.position.y(), p.position.z()}},
                              {"orientation", {p.orientation.yaw, p.orientation.pitch, p.orientation.roll}}});
    }
    return fnv1a(doc.dump());
}

std::map<std::string, Mdp> fingerprint_at(const TracingScene& scene, std::span<const AccessPoint> aps,
                                          const Pose& receiver, const FingerprintBuildParams& params) {
    std::map<std::string, Mdp> out;
    for (const auto& ap : aps) {
        const PathSet paths = trace_paths(scene, ap.pose, receiver, params.tracing, params.carrier_freq);
        out.emplace(ap.id, compute_mdp(paths, params.bin_width, params.num_bins, ap.id));
    }
    return out;
}

FingerprintDB build_fingerprint_db(const Scene& scene, std::span<const AccessPoint> aps, std::span<const Vec3> grid,
                                   const FingerprintBuildParams& params) {
    if (grid.empty()) fail(ErrorCode::invalid_argument, "fingerprint grid is empty");
    if (aps.empty()) fail(ErrorCode::invalid_argument, "no access points");
    check_bins(params.bin_width, params.num_bins);

    FingerprintDB db;
    db.points.assign(grid.begin(), grid.end());
    db.spacing = params.spacing;
    db.height = params.height;
    for (const auto& ap : aps) db.ap_ids.push_back(ap.id);
    db.bin_width = params.bin_width;
    db.num_bins = params.num_bins;
    db.scene_hash = scene_hash(scene);
    db.network_hash = network_hash(aps, params.tracing, params.carrier_freq);
    db.bins.assign(db.entry_count() * db.num_bins, 0.0);

    const TracingScene tracing(scene);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Pose rx;
            rx.position = grid[i];
            for (std::size_t a = 0; a < aps.size(); ++a) {
                const PathSet paths = trace_paths(tracing, aps[a].pose, rx, params.tracing, params.carrier_freq);
                const Mdp mdp = compute_mdp(paths, params.bin_width, params.num_bins);
                std::copy(mdp.bins.begin(), mdp.bins.end(), db.bins.begin() + static_cast<std::ptrdiff_t>((i * aps.size() + a) * db.num_bins));
            }
        }
    };

    unsigned threads = params.threads != 0 ? params.threads : std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, grid.size()));
    if (threads <= 1) {
        work(0, grid.size());
    } else {
        // Each worker owns a disjoint slice of the output, so the result is independent of scheduling.
        std::vector<std::jthread> pool;
        const std::size_t chunk = (grid.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(grid.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }
    return db;
}

std::string encode_fingerprint_db(const FingerprintDB& db) {
    Writer w;
    w.bytes(magic, sizeof magic);
    w.u32(format_version);
    w.u64(db.scene_hash);
    w.u64(db.network_hash);
    w.f64(db.spacing);
    w.f64(db.height);
    w.u64(db.points.size());
    w.f64(db.bin_width);
    w.u32(static_cast<std::uint32_t>(db.num_bins));
    w.u32(static_cast<std::uint32_t>(db.ap_ids.size()));
    for (const auto& id : db.ap_ids) w.str(id);
    for (std::size_t i = 0; i < db.points.size(); ++i) {
        for (int c = 0; c < 3; ++c) w.f64(db.points[i][c]);
        for (std::size_t a = 0; a < db.ap_ids.size(); ++a)
            for (double b : db.profile(i, a)) w.f64(b);
    }
    return w.take();
}

FingerprintDB decode_fingerprint_db(std::string_view bytes) {
    Reader r(bytes);
    if (r.view(sizeof magic) != std::string_view(magic, sizeof magic))
        fail(ErrorCode::parse, "not a fingerprint database (bad magic)");
    if (const auto v = r.u32(); v != format_version)
        fail(ErrorCode::parse, "unsupported fingerprint database version " + std::to_string(v));
    FingerprintDB db;
    db.scene_hash = r.u64();
    db.network_hash = r.u64();
    db.spacing = r.f64();
    db.height = r.f64();
    const std::uint64_t n_points = r.u64();
    db.bin_width = r.f64();
    db.num_bins = r.u32();
    const std::uint32_t n_aps = r.u32();
    for (std::uint32_t a = 0; a < n_aps; ++a) db.ap_ids.push_back(r.str());
    if (n_points > bytes.size()) fail(ErrorCode::parse, "corrupt fingerprint database header");
    db.points.reserve(n_points);
    db.bins.reserve(n_points * n_aps * db.num_bins);
    for (std::uint64_t i = 0; i < n_points; ++i) {
        Vec3 p;
        for (int c = 0; c < 3; ++c) p[c] = r.f64();
        db.points.push_back(p);
        for (std::size_t k = 0; k < n_aps * db.num_bins; ++k) db.bins.push_back(r.f64());
    }
    if (!r.done()) fail(ErrorCode::parse, "trailing bytes in fingerprint database");
    return db;
}

void write_fingerprint_db(const FingerprintDB& db, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    const std::string bytes = encode_fingerprint_db(db);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

FingerprintDB read_fingerprint_db(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return decode_fingerprint_db(buffer.str());
}

Localizer::Localizer(const FingerprintDB& db) : db_(&db), prepared_(db.bins.size()) {
    for (std::size_t i = 0; i < db.points.size(); ++i) {
        for (std::size_t a = 0; a < db.ap_ids.size(); ++a) {
            const std::size_t offset = (i * db.ap_ids.size() + a) * db.num_bins;
            prepare(db.profile(i, a), std::span<double>(prepared_).subspan(offset, db.num_bins));
        }
    }
}

LocationEstimate Localizer::locate(const std::map<std::string, Mdp>& measured) const {
    const FingerprintDB& db = *db_;
    if (measured.empty()) fail(ErrorCode::invalid_argument, "no measured fingerprints");
    if (db.points.empty()) fail(ErrorCode::invalid_argument, "empty fingerprint database");

    std::vector<std::pair<std::size_t, std::vector<double>>> queries;
    for (const auto& [id, mdp] : measured) {
        const std::size_t a = db.ap_index(id);
        if (mdp.bin_width != db.bin_width || mdp.num_bins() != db.num_bins)
            fail(ErrorCode::bin_mismatch, "measured MDP for '" + id + "' uses different bins than the database");
        std::vector<double> q(db.num_bins);
        prepare(mdp.bins, q);
        queries.emplace_back(a, std::move(q));
    }

    LocationEstimate best;
    best.score = std::numeric_limits<double>::infinity();
    const std::span<const double> prepared(prepared_);
    for (std::size_t i = 0; i < db.points.size(); ++i) {
        double score = 0.0;
        for (const auto& [a, q] : queries)
            score += rms_difference(q, prepared.subspan((i * db.ap_ids.size() + a) * db.num_bins, db.num_bins));
        if (score < best.score) {
            best.score = score;
            best.index = i;
        }
    }
    best.position = db.points[best.index];
    return best;
}

LocationEstimate localize(const std::map<std::string, Mdp>& measured, const FingerprintDB& db) {
    return Localizer(db).locate(measured);
}

}  // namespace dtwin
