#include "semsal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "semsal/random.hpp"
#include "semsal/tensor_io.hpp"
#include "text_util.hpp"

namespace semsal::metrics {

Map::Map(std::size_t w, std::size_t h, std::vector<double> v) : width(w), height(h), values(std::move(v)) {
    if (values.size() != w * h) throw std::invalid_argument("Map: value count does not match extents");
}

void FixationSet::validate() const {
    for (const auto& f : points) {
        if (f.x < 0 || f.y < 0 || static_cast<std::size_t>(f.x) >= width || static_cast<std::size_t>(f.y) >= height) {
            throw std::out_of_range("fixation (" + std::to_string(f.x) + "," + std::to_string(f.y) + ") outside image");
        }
    }
}

FixationSet load_fixations(const std::filesystem::path& path, std::size_t width, std::size_t height) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    FixationSet set{width, height, {}};
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        auto cells = text::split(line, ',');
        if (cells.size() != 2) throw FormatError(path.string() + ": expected x,y lines");
        set.points.push_back({static_cast<int>(text::parse_long(cells[0], "x")), static_cast<int>(text::parse_long(cells[1], "y"))});
    }
    try {
        set.validate();
    } catch (const std::out_of_range& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return set;
}

void save_fixations(const std::filesystem::path& path, const FixationSet& fixations) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    for (const auto& f : fixations.points) out << f.x << "," << f.y << "\n";
}

namespace {

void require_fixations(const Map& map, const FixationSet& fix) {
    if (fix.points.empty()) throw std::invalid_argument("metric needs at least one fixation");
    if (fix.width != map.width || fix.height != map.height) throw std::invalid_argument("fixation extents differ from map");
    fix.validate();
}

void require_same_extents(const Map& a, const Map& b) {
    if (a.width != b.width || a.height != b.height) throw std::invalid_argument("maps differ in extents");
    if (a.values.empty()) throw std::invalid_argument("empty map");
}

std::vector<double> unit_sum(const Map& m) {
    double total = 0;
    for (double v : m.values) {
        if (v < 0) throw std::invalid_argument("distribution metric needs a non-negative map");
        total += v;
    }
    if (!(total > 0)) throw std::invalid_argument("distribution metric needs a map with positive sum");
    std::vector<double> out(m.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.values[i] / total;
    return out;
}

struct Moments {
    double mean, stddev;
};

Moments moments(std::span<const double> v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

}  // namespace

double mann_whitney_auc(std::span<const double> positives, std::span<const double> negatives) {
    if (positives.empty() || negatives.empty()) throw std::invalid_argument("AUC needs positives and negatives");
    struct Item {
        double value;
        bool positive;
    };
    std::vector<Item> all;
    all.reserve(positives.size() + negatives.size());
    for (double v : positives) all.push_back({v, true});
    for (double v : negatives) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.value < b.value; });

    // Twice the rank sum keeps tied (half-integer) ranks exact.
    double twice_rank_sum = 0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        std::size_t pos_in_group = 0;
        while (j < all.size() && all[j].value == all[i].value) pos_in_group += all[j++].positive;
        // Ranks i+1..j share the average (i+1+j)/2.
        twice_rank_sum += static_cast<double>(pos_in_group) * static_cast<double>(i + 1 + j);
        i = j;
    }
    const double np = static_cast<double>(positives.size()), nn = static_cast<double>(negatives.size());
    const double twice_u = twice_rank_sum - np * (np + 1);
    return twice_u / (2 * np * nn);
}

double nss(const Map& map, const FixationSet& fix) {
    require_fixations(map, fix);
    const auto [m, sd] = moments(map.values);
    if (sd == 0) return 0.0;
    double total = 0;
    for (const auto& f : fix.points) total += (map.at(f.x, f.y) - m) / sd;
    return total / static_cast<double>(fix.points.size());
}

double auc_judd(const Map& map, const FixationSet& fix) {
    require_fixations(map, fix);
    std::vector<char> fixated(map.size(), 0);
    std::vector<double> positives;
    for (const auto& f : fix.points) {
        positives.push_back(map.at(f.x, f.y));
        fixated[f.y * map.width + f.x] = 1;
    }
    std::vector<double> negatives;
    for (std::size_t i = 0; i < map.size(); ++i)
        if (!fixated[i]) negatives.push_back(map.values[i]);
    if (negatives.empty()) throw std::invalid_argument("AUC-Judd: every pixel is fixated");
    return mann_whitney_auc(positives, negatives);
}

double sauc(const Map& map, const FixationSet& fix, std::span<const FixationSet> other_fix, std::uint64_t seed) {
    require_fixations(map, fix);
    std::set<std::pair<int, int>> own;
    for (const auto& f : fix.points) own.emplace(f.y, f.x);
    std::set<std::pair<int, int>> pool_set;
    for (const auto& other : other_fix) {
        if (other.width != map.width || other.height != map.height)
            throw std::invalid_argument("sAUC: other fixation sets must share the map extent");
        other.validate();
        for (const auto& f : other.points)
            if (!own.contains({f.y, f.x})) pool_set.emplace(f.y, f.x);
    }
    if (pool_set.empty()) throw std::invalid_argument("sAUC: no negative locations left after excluding fixated pixels");
    const std::vector<std::pair<int, int>> pool(pool_set.begin(), pool_set.end());

    std::vector<double> positives;
    for (const auto& f : fix.points) positives.push_back(map.at(f.x, f.y));
    const std::size_t draw = std::min(fix.points.size(), pool.size());

    Rng rng(seed);
    double total = 0;
    std::vector<std::size_t> order(pool.size());
    for (int r = 0; r < kShuffledResamples; ++r) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> negatives;
        for (std::size_t k = 0; k < draw; ++k) {
            const std::size_t pick = k + static_cast<std::size_t>(rng.below(order.size() - k));
            std::swap(order[k], order[pick]);
            const auto& [y, x] = pool[order[k]];
            negatives.push_back(map.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)));
        }
        total += mann_whitney_auc(positives, negatives);
    }
    return total / kShuffledResamples;
}

double cc(const Map& a, const Map& b) {
    require_same_extents(a, b);
    const auto ma = moments(a.values), mb = moments(b.values);
    if (ma.stddev == 0 || mb.stddev == 0) return 0.0;
    double cov = 0;
    for (std::size_t i = 0; i < a.size(); ++i) cov += (a.values[i] - ma.mean) * (b.values[i] - mb.mean);
    cov /= static_cast<double>(a.size());
    return cov / (ma.stddev * mb.stddev);
}

double sim(const Map& a, const Map& b) {
    require_same_extents(a, b);
    const auto na = unit_sum(a), nb = unit_sum(b);
    double total = 0;
    for (std::size_t i = 0; i < na.size(); ++i) total += std::min(na[i], nb[i]);
    return total;
}

double kl(const Map& pred, const Map& gt) {
    require_same_extents(pred, gt);
    const auto p = unit_sum(pred), g = unit_sum(gt);
    double total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) total += g[i] * std::log(g[i] / (p[i] + kKlEpsilon) + kKlEpsilon);
    return total;
}

}  // namespace semsal::metrics
