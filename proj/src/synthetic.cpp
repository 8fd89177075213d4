#include "semsal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "semsal/random.hpp"
#include "semsal/tensor_io.hpp"
#include "text_util.hpp"

namespace semsal {

std::vector<std::string> default_categories() { return {"person", "bicycle", "car", "bus", "dog", "cat", "cup", "bowl"}; }

Taxonomy default_taxonomy() {
    return Taxonomy("entity", {{"organism", "entity"},
                               {"vehicle", "entity"},
                               {"container", "entity"},
                               {"person", "organism"},
                               {"dog", "organism"},
                               {"cat", "organism"},
                               {"bicycle", "vehicle"},
                               {"car", "vehicle"},
                               {"bus", "vehicle"},
                               {"cup", "container"},
                               {"bowl", "container"}});
}

CooccurrenceCorpus default_corpus() {
    // Pair counts chosen so every normalized entry sits well away from the
    // 0.3 threshold.
    const std::vector<std::pair<std::vector<std::string>, int>> recipe{
        {{"person", "bicycle"}, 12}, {{"cup", "bowl"}, 11}, {{"bus", "car"}, 10},   {{"person", "cup"}, 9},
        {{"person", "dog"}, 8},      {{"dog", "cat"}, 2},   {{"car", "bicycle"}, 2}, {{"cat", "bowl"}, 2},
        {{"bus", "person"}, 1},      {{"person"}, 5},       {{"car"}, 3},
    };
    CooccurrenceCorpus corpus;
    for (const auto& [labels, times] : recipe)
        for (int k = 0; k < times; ++k) corpus.records.push_back(labels);
    return corpus;
}

KnowledgeBundle load_knowledge(const RunConfig& config) {
    auto categories = config.categories_file.empty() ? default_categories() : load_categories(config.categories_file);
    auto taxonomy = config.taxonomy_file.empty() ? default_taxonomy() : Taxonomy::load(config.taxonomy_file);
    auto corpus = config.corpus_file.empty() ? default_corpus() : CooccurrenceCorpus::load(config.corpus_file);
    auto cooc = build_cooccurrence_graph(corpus, categories, config.theta_cooccurrence);
    auto wup = build_wup_graph(taxonomy, categories, config.theta_wup);
    return {std::move(categories), std::move(taxonomy), std::move(corpus), std::move(cooc), std::move(wup)};
}

std::vector<ProximityGraph> select_graphs(const KnowledgeBundle& knowledge, KnowledgeSources sources) {
    switch (sources) {
        case KnowledgeSources::none: return {};
        case KnowledgeSources::cooccurrence: return {knowledge.cooccurrence};
        case KnowledgeSources::wup: return {knowledge.wup};
        case KnowledgeSources::both: return {knowledge.cooccurrence, knowledge.wup};
    }
    return {};
}

ProximityGraph label_graph(const std::vector<ProximityGraph>& sources) {
    if (sources.empty()) throw std::invalid_argument("label_graph: no knowledge sources");
    const auto& labels = sources[0].labels;
    for (const auto& g : sources) {
        if (g.labels != labels) throw std::invalid_argument("label_graph: sources disagree on labels");
    }
    const std::size_t q = labels.size();
    ProximityGraph out{labels, std::vector<double>(q * q, 0.0), 0.0};
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j) {
            if (i == j) {
                out.adjacency[i * q + j] = 1.0;
                continue;
            }
            double best = 0.0;
            for (const auto& g : sources)
                if (g.at(i, j) > g.theta) best = std::max(best, g.at(i, j));
            out.adjacency[i * q + j] = kRelatedSaliency * best;
        }
    return out;
}

CategorySignature category_signature(std::size_t index) {
    static const CategorySignature kTable[] = {
        {{0.85, 0.25, 0.25}, 0}, {{0.25, 0.85, 0.25}, 1}, {{0.25, 0.25, 0.85}, 2}, {{0.85, 0.85, 0.20}, 3},
        {{0.85, 0.20, 0.85}, 1}, {{0.20, 0.85, 0.85}, 2}, {{0.90, 0.55, 0.15}, 3}, {{0.55, 0.30, 0.90}, 0},
    };
    if (index < std::size(kTable)) return kTable[index];
    Rng rng(0xC0FFEEULL + index);
    CategorySignature s{{rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9)}, static_cast<int>(rng.below(4))};
    return s;
}

SceneSpec scene_spec_from(const RunConfig& config, const KnowledgeBundle& knowledge) {
    SceneSpec spec;
    spec.width = spec.height = config.image_size;
    spec.categories = knowledge.categories;
    spec.min_objects = config.min_objects;
    spec.max_objects = std::min(config.max_objects, knowledge.categories.size());
    spec.min_objects = std::min(spec.min_objects, spec.max_objects);
    spec.fixations = config.fixations;
    spec.blur_sigma = config.blur_sigma;
    spec.label_graph = label_graph({knowledge.cooccurrence, knowledge.wup});
    spec.seed = config.seed;
    return spec;
}

std::vector<double> gaussian_blur(const std::vector<double>& image, std::size_t width, std::size_t height, double sigma) {
    const int radius = static_cast<int>(std::ceil(3 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    for (int k = -radius; k <= radius; ++k) kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    const double norm = std::accumulate(kernel.begin(), kernel.end(), 0.0);
    for (auto& v : kernel) v /= norm;

    const auto W = static_cast<int>(width), H = static_cast<int>(height);
    std::vector<double> tmp(image.size(), 0.0), out(image.size(), 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0;
            for (int k = -radius; k <= radius; ++k) {
                const int xx = x + k;
                if (xx >= 0 && xx < W) acc += kernel[k + radius] * image[y * W + xx];
            }
            tmp[y * W + x] = acc;
        }
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0;
            for (int k = -radius; k <= radius; ++k) {
                const int yy = y + k;
                if (yy >= 0 && yy < H) acc += kernel[k + radius] * tmp[yy * W + x];
            }
            out[y * W + x] = acc;
        }
    return out;
}

namespace {

constexpr int kPlacementTries = 400;
constexpr int kSceneRestarts = 50;
constexpr int kGap = 1;
constexpr double kBackgroundNoise = 0.15;
constexpr double kBackgroundMass = 1e-6;

bool overlaps(const Box& a, const Box& b) {
    return a.x0 < b.x1 + kGap && b.x0 < a.x1 + kGap && a.y0 < b.y1 + kGap && b.y0 < a.y1 + kGap;
}

std::optional<std::vector<Box>> place_boxes(std::size_t count, const SceneSpec& spec, Rng& rng) {
    const int W = static_cast<int>(spec.width), H = static_cast<int>(spec.height);
    const int lo = std::max(6, static_cast<int>(spec.width) * 9 / 64);
    const int hi = std::max(lo, static_cast<int>(spec.width) * 16 / 64);
    std::vector<Box> boxes;
    for (std::size_t k = 0; k < count; ++k) {
        bool placed = false;
        for (int t = 0; t < kPlacementTries && !placed; ++t) {
            const int w = rng.range(lo, hi), h = rng.range(lo, hi);
            const int x0 = rng.range(0, W - w), y0 = rng.range(0, H - h);
            const Box b{x0, y0, x0 + w, y0 + h};
            if (std::none_of(boxes.begin(), boxes.end(), [&](const Box& o) { return overlaps(b, o); })) {
                boxes.push_back(b);
                placed = true;
            }
        }
        if (!placed) return std::nullopt;
    }
    return boxes;
}

double pattern_gain(int pattern, int x, int y) {
    switch (pattern) {
        case 1: return (y / 2) % 2 ? 0.5 : 1.0;
        case 2: return (x / 2) % 2 ? 0.5 : 1.0;
        case 3: return ((x / 2) + (y / 2)) % 2 ? 0.5 : 1.0;
        default: return 1.0;
    }
}

SaliencySample make_scene(const SceneSpec& spec, Rng& rng) {
    const std::size_t W = spec.width, H = spec.height;
    const std::size_t q = spec.categories.size();
    std::optional<std::vector<Box>> boxes;
    std::size_t count = 0;
    for (int attempt = 0; attempt < kSceneRestarts && !boxes; ++attempt) {
        count = static_cast<std::size_t>(rng.range(static_cast<int>(spec.min_objects), static_cast<int>(spec.max_objects)));
        boxes = place_boxes(count, spec, rng);
    }
    if (!boxes) throw std::runtime_error("scene generator: could not place objects without overlap");

    // Distinct categories per scene.
    std::vector<std::size_t> cats(q);
    std::iota(cats.begin(), cats.end(), std::size_t{0});
    for (std::size_t k = 0; k < count; ++k) std::swap(cats[k], cats[k + rng.below(q - k)]);
    cats.resize(count);
    const std::size_t seed_object = rng.below(count);

    SaliencySample s;
    std::vector<double> img(3 * H * W);
    for (auto& v : img) v = rng.uniform(0.0, kBackgroundNoise);
    std::vector<double> mass(H * W, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
        const Box& b = (*boxes)[k];
        const auto sig = category_signature(cats[k]);
        const double weight =
            k == seed_object ? 1.0 : spec.label_graph.at(cats[seed_object], cats[k]);
        for (int y = b.y0; y < b.y1; ++y)
            for (int x = b.x0; x < b.x1; ++x) {
                const bool border = x == b.x0 || x == b.x1 - 1 || y == b.y0 || y == b.y1 - 1;
                const double gain = pattern_gain(sig.pattern, x - b.x0, y - b.y0);
                for (std::size_t c = 0; c < 3; ++c) {
                    img[(c * H + y) * W + x] = k == seed_object && border ? 1.0 : sig.color[c] * gain;
                }
                mass[y * W + x] = weight;
            }
        s.objects.boxes.push_back(b);
        s.objects.labels.push_back(spec.categories[cats[k]]);
    }
    s.seed_object = seed_object;
    s.image = Tensor({3, H, W}, std::move(img));

    auto density = gaussian_blur(mass, W, H, spec.blur_sigma);
    for (auto& v : density) v += kBackgroundMass;
    const double total = std::accumulate(density.begin(), density.end(), 0.0);
    for (auto& v : density) v /= total;

    std::vector<double> cdf(density.size());
    std::partial_sum(density.begin(), density.end(), cdf.begin());
    s.fixations = {W, H, {}};
    for (std::size_t f = 0; f < spec.fixations; ++f) {
        const double u = rng.uniform() * cdf.back();
        auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        idx = std::min(idx, cdf.size() - 1);
        s.fixations.points.push_back({static_cast<int>(idx % W), static_cast<int>(idx / W)});
    }
    s.density = Tensor({H, W}, std::move(density));
    return s;
}

}  // namespace

std::vector<SaliencySample> generate_dataset(const SceneSpec& spec, std::size_t count) {
    if (count == 0) throw std::invalid_argument("generate_dataset: count must be positive");
    if (spec.categories.empty()) throw std::invalid_argument("generate_dataset: no categories");
    if (spec.label_graph.labels != spec.categories) {
        throw std::invalid_argument("generate_dataset: label graph does not match the category list");
    }
    if (spec.min_objects < 1 || spec.min_objects > spec.max_objects || spec.max_objects > spec.categories.size()) {
        throw std::invalid_argument("generate_dataset: invalid object count range");
    }
    Rng root(spec.seed);
    std::vector<SaliencySample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = root.fork(i);
        out.push_back(make_scene(spec, rng));
    }
    return out;
}

Split split_dataset(std::size_t count, double val_fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed ^ 0x5EEDULL);
    for (std::size_t k = count; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    auto n_val = static_cast<std::size_t>(std::lround(static_cast<double>(count) * val_fraction));
    if (count > 1) n_val = std::clamp<std::size_t>(n_val, 1, count - 1);
    else n_val = 0;
    Split s;
    s.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
    s.val.assign(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    return s;
}

namespace {

std::string sample_stem(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", i);
    return buf;
}

}  // namespace

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "dataset.txt");
    if (!manifest) throw FormatError("cannot write " + (dir / "dataset.txt").string());
    const auto& first = dataset.samples.at(0);
    manifest << "SALDATA1\n"
             << "width=" << first.image.dim(2) << "\n"
             << "height=" << first.image.dim(1) << "\n"
             << "count=" << dataset.samples.size() << "\n"
             << "categories=";
    for (std::size_t i = 0; i < dataset.categories.size(); ++i) manifest << (i ? "," : "") << dataset.categories[i];
    manifest << "\n";
    std::vector<char> is_val(dataset.samples.size(), 0);
    for (auto v : dataset.split.val) is_val[v] = 1;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto& s = dataset.samples[i];
        const auto stem = sample_stem(i);
        manifest << "sample=" << stem << "," << (is_val[i] ? "val" : "train") << "," << s.seed_object << "\n";
        save_gtsr(dir / (stem + "_image.gtsr"), s.image);
        save_gtsr(dir / (stem + "_density.gtsr"), s.density);
        save_boxes(dir / (stem + "_boxes.txt"), s.objects);
        metrics::save_fixations(dir / (stem + "_fixations.txt"), s.fixations);
    }
}

Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "dataset.txt");
    if (!manifest) throw FormatError("cannot open " + (dir / "dataset.txt").string());
    std::string line;
    if (!std::getline(manifest, line) || text::trim(line) != "SALDATA1") throw FormatError("dataset: missing SALDATA1 header");
    Dataset d;
    std::size_t width = 0, height = 0, count = 0;
    while (std::getline(manifest, line)) {
        auto t = text::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw FormatError("dataset: malformed manifest line");
        const std::string key(t.substr(0, eq));
        const std::string value(t.substr(eq + 1));
        if (key == "width") width = static_cast<std::size_t>(text::parse_long(value, key));
        else if (key == "height") height = static_cast<std::size_t>(text::parse_long(value, key));
        else if (key == "count") count = static_cast<std::size_t>(text::parse_long(value, key));
        else if (key == "categories") d.categories = text::split(value, ',');
        else if (key == "sample") {
            auto cells = text::split(value, ',');
            if (cells.size() != 3) throw FormatError("dataset: sample lines need stem,split,seed_object");
            const std::size_t index = d.samples.size();
            SaliencySample s;
            s.image = load_gtsr(dir / (cells[0] + "_image.gtsr"));
            s.density = load_gtsr(dir / (cells[0] + "_density.gtsr"));
            s.objects = load_boxes(dir / (cells[0] + "_boxes.txt"));
            s.fixations = metrics::load_fixations(dir / (cells[0] + "_fixations.txt"), width, height);
            s.seed_object = static_cast<std::size_t>(text::parse_long(cells[2], "seed_object"));
            if (s.image.shape() != Shape{3, height, width} || s.density.shape() != Shape{height, width}) {
                throw FormatError("dataset: sample " + cells[0] + " does not match manifest extents");
            }
            for (const auto& b : s.objects.boxes) {
                try {
                    validate_box(b, width, height);
                } catch (const std::invalid_argument& e) {
                    throw FormatError("dataset: sample " + cells[0] + ": " + e.what());
                }
            }
            // Stored as float32; restore an exact unit sum.
            auto dv = s.density.mutable_data();
            const double total = std::accumulate(dv.begin(), dv.end(), 0.0);
            if (!(total > 0)) throw FormatError("dataset: sample " + cells[0] + " has an empty density");
            for (auto& v : dv) v /= total;
            (cells[1] == "val" ? d.split.val : d.split.train).push_back(index);
            d.samples.push_back(std::move(s));
        } else {
            throw FormatError("dataset: unknown manifest key '" + key + "'");
        }
    }
    if (d.samples.size() != count || count == 0) throw FormatError("dataset: sample count does not match manifest");
    return d;
}

Dataset make_dataset(const RunConfig& config, const KnowledgeBundle& knowledge) {
    Dataset d;
    d.categories = knowledge.categories;
    d.samples = generate_dataset(scene_spec_from(config, knowledge), config.scene_count);
    d.split = split_dataset(d.samples.size(), config.val_fraction, config.seed);
    return d;
}

}  // namespace semsal
