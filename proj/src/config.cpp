#include "semsal/config.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include "semsal/knowledge.hpp"
#include "semsal/tensor_io.hpp"
#include "text_util.hpp"

namespace semsal {

std::string to_string(KnowledgeSources k) {
    switch (k) {
        case KnowledgeSources::none: return "none";
        case KnowledgeSources::cooccurrence: return "cooccurrence";
        case KnowledgeSources::wup: return "wup";
        case KnowledgeSources::both: return "both";
    }
    return "none";
}

KnowledgeSources parse_knowledge(const std::string& s) {
    if (s == "none") return KnowledgeSources::none;
    if (s == "cooccurrence") return KnowledgeSources::cooccurrence;
    if (s == "wup") return KnowledgeSources::wup;
    if (s == "both") return KnowledgeSources::both;
    throw FormatError("knowledge must be none|cooccurrence|wup|both, got '" + s + "'");
}

void RunConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("config: ") + what);
    };
    require(weights.beta >= 0 && weights.gamma >= 0 && weights.lambda >= 0, "loss weights must be non-negative");
    require(theta_cooccurrence >= 0 && theta_cooccurrence <= 1 && theta_wup >= 0 && theta_wup <= 1, "thresholds must lie in [0,1]");
    require(heads > 0 && channels % heads == 0, "heads must divide channels");
    require(!center_bias || priors > 0, "center bias needs at least one prior map");
    require(lr > 0 && lr_decay >= 0, "learning rate must be positive and decay non-negative");
    require(batch_size > 0 && iterations > 0, "batch size and iterations must be positive");
    require(!seeds.empty(), "seeds must not be empty");
    require(image_size >= 32, "image_size must be at least 32");
    require(scene_count >= 1, "scene_count must be positive");
    require(min_objects >= 1 && min_objects <= max_objects, "object count range is empty");
    require(fixations >= 1, "fixations must be positive");
    require(blur_sigma > 0, "blur_sigma must be positive");
    require(val_fraction > 0 && val_fraction < 1, "val_fraction must lie in (0,1)");
}

namespace {

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw FormatError("expected a boolean, got '" + v + "'");
}

std::size_t parse_size(const std::string& v, const std::string& key) {
    const long n = text::parse_long(v, key);
    if (n < 0) throw FormatError(key + " must be non-negative");
    return static_cast<std::size_t>(n);
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    RunConfig c;
    auto path_of = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters{
        {"beta", [&](auto& k, auto& v) { c.weights.beta = text::parse_double(v, k); }},
        {"gamma", [&](auto& k, auto& v) { c.weights.gamma = text::parse_double(v, k); }},
        {"lambda", [&](auto& k, auto& v) { c.weights.lambda = text::parse_double(v, k); }},
        {"knowledge", [&](auto&, auto& v) { c.knowledge = parse_knowledge(v); }},
        {"theta_cooccurrence", [&](auto& k, auto& v) { c.theta_cooccurrence = text::parse_double(v, k); }},
        {"theta_wup", [&](auto& k, auto& v) { c.theta_wup = text::parse_double(v, k); }},
        {"center_bias", [&](auto&, auto& v) { c.center_bias = parse_bool(v); }},
        {"priors", [&](auto& k, auto& v) { c.priors = parse_size(v, k); }},
        {"heads", [&](auto& k, auto& v) { c.heads = parse_size(v, k); }},
        {"channels", [&](auto& k, auto& v) { c.channels = parse_size(v, k); }},
        {"lr", [&](auto& k, auto& v) { c.lr = text::parse_double(v, k); }},
        {"lr_decay", [&](auto& k, auto& v) { c.lr_decay = text::parse_double(v, k); }},
        {"batch_size", [&](auto& k, auto& v) { c.batch_size = parse_size(v, k); }},
        {"iterations", [&](auto& k, auto& v) { c.iterations = parse_size(v, k); }},
        {"seed", [&](auto& k, auto& v) { c.seed = parse_size(v, k); }},
        {"seeds",
         [&](auto& k, auto& v) {
             c.seeds.clear();
             for (auto& s : text::split(v, ',')) c.seeds.push_back(parse_size(s, k));
         }},
        {"image_size", [&](auto& k, auto& v) { c.image_size = parse_size(v, k); }},
        {"scene_count", [&](auto& k, auto& v) { c.scene_count = parse_size(v, k); }},
        {"min_objects", [&](auto& k, auto& v) { c.min_objects = parse_size(v, k); }},
        {"max_objects", [&](auto& k, auto& v) { c.max_objects = parse_size(v, k); }},
        {"fixations", [&](auto& k, auto& v) { c.fixations = parse_size(v, k); }},
        {"blur_sigma", [&](auto& k, auto& v) { c.blur_sigma = text::parse_double(v, k); }},
        {"val_fraction", [&](auto& k, auto& v) { c.val_fraction = text::parse_double(v, k); }},
        {"categories", [&](auto&, auto& v) { c.categories_file = path_of(v); }},
        {"taxonomy", [&](auto&, auto& v) { c.taxonomy_file = path_of(v); }},
        {"corpus", [&](auto&, auto& v) { c.corpus_file = path_of(v); }},
    };

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto t = text::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key(text::trim(t.substr(0, eq)));
        const std::string value(text::trim(t.substr(eq + 1)));
        auto it = setters.find(key);
        if (it == setters.end()) throw FormatError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        it->second(key, value);
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    return parse_config(in, path.parent_path());
}

void write_config(std::ostream& out, const RunConfig& c) {
    out << "beta = " << format_double(c.weights.beta) << "\n"
        << "gamma = " << format_double(c.weights.gamma) << "\n"
        << "lambda = " << format_double(c.weights.lambda) << "\n"
        << "knowledge = " << to_string(c.knowledge) << "\n"
        << "theta_cooccurrence = " << format_double(c.theta_cooccurrence) << "\n"
        << "theta_wup = " << format_double(c.theta_wup) << "\n"
        << "center_bias = " << (c.center_bias ? "true" : "false") << "\n"
        << "priors = " << c.priors << "\n"
        << "heads = " << c.heads << "\n"
        << "channels = " << c.channels << "\n"
        << "lr = " << format_double(c.lr) << "\n"
        << "lr_decay = " << format_double(c.lr_decay) << "\n"
        << "batch_size = " << c.batch_size << "\n"
        << "iterations = " << c.iterations << "\n"
        << "seed = " << c.seed << "\n"
        << "seeds = ";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) out << (i ? "," : "") << c.seeds[i];
    out << "\n"
        << "image_size = " << c.image_size << "\n"
        << "scene_count = " << c.scene_count << "\n"
        << "min_objects = " << c.min_objects << "\n"
        << "max_objects = " << c.max_objects << "\n"
        << "fixations = " << c.fixations << "\n"
        << "blur_sigma = " << format_double(c.blur_sigma) << "\n"
        << "val_fraction = " << format_double(c.val_fraction) << "\n";
    if (!c.categories_file.empty()) out << "categories = " << c.categories_file.string() << "\n";
    if (!c.taxonomy_file.empty()) out << "taxonomy = " << c.taxonomy_file.string() << "\n";
    if (!c.corpus_file.empty()) out << "corpus = " << c.corpus_file.string() << "\n";
}

}  // namespace semsal
