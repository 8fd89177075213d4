#include "semsal/knowledge.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "semsal/tensor_io.hpp"
#include "text_util.hpp"

namespace semsal {

Taxonomy::Taxonomy(std::string root, const std::vector<std::pair<std::string, std::string>>& edges)
    : root_(std::move(root)) {
    if (root_.empty()) throw FormatError("taxonomy: empty root label");
    for (const auto& [child, parent] : edges) {
        if (child.empty() || parent.empty()) throw FormatError("taxonomy: empty label");
        if (child == root_) throw FormatError("taxonomy: root '" + root_ + "' given a parent");
        auto [it, inserted] = parent_.emplace(child, parent);
        if (!inserted && it->second != parent) {
            throw FormatError("taxonomy: '" + child + "' has more than one parent");
        }
    }
    for (const auto& [child, parent] : parent_) {
        // Every chain must end at the root within |nodes| hops.
        std::string cur = child;
        std::size_t hops = 0;
        while (cur != root_) {
            auto it = parent_.find(cur);
            if (it == parent_.end()) throw FormatError("taxonomy: '" + cur + "' does not reach root '" + root_ + "'");
            cur = it->second;
            if (++hops > parent_.size()) throw FormatError("taxonomy: cycle through '" + child + "'");
        }
    }
}

Taxonomy Taxonomy::parse(std::istream& in) {
    std::optional<std::string> root;
    std::vector<std::pair<std::string, std::string>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto tab = t.find('\t');
        if (tab == std::string_view::npos) {
            throw FormatError("taxonomy line " + std::to_string(lineno) + ": expected child<TAB>parent");
        }
        std::string child(text::trim(t.substr(0, tab)));
        std::string parent(text::trim(t.substr(tab + 1)));
        if (parent == "-") {
            if (root && *root != child) throw FormatError("taxonomy: more than one root");
            root = child;
        } else {
            edges.emplace_back(std::move(child), std::move(parent));
        }
    }
    if (!root) throw FormatError("taxonomy: no root line");
    return Taxonomy(*root, edges);
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    return parse(in);
}

std::optional<std::string> Taxonomy::parent(const std::string& label) const {
    if (label == root_) return std::nullopt;
    auto it = parent_.find(label);
    if (it == parent_.end()) throw UnknownLabel(label);
    return it->second;
}

std::vector<std::string> Taxonomy::ancestors(const std::string& label) const {
    if (!contains(label)) throw UnknownLabel(label);
    std::vector<std::string> path{label};
    while (path.back() != root_) path.push_back(parent_.at(path.back()));
    return path;
}

std::size_t Taxonomy::depth(const std::string& label) const { return ancestors(label).size(); }

std::vector<std::string> Taxonomy::nodes() const {
    std::vector<std::string> out{root_};
    for (const auto& [child, _] : parent_) out.push_back(child);
    return out;
}

double wup_similarity(const Taxonomy& taxonomy, const std::string& a, const std::string& b) {
    const auto pa = taxonomy.ancestors(a);
    const auto pb = taxonomy.ancestors(b);
    // Both paths end at the root; the lowest common subsumer is the first
    // node of pa that also lies on pb.
    const std::set<std::string> on_b(pb.begin(), pb.end());
    std::size_t lcs_depth = 1;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (on_b.contains(pa[i])) {
            lcs_depth = pa.size() - i;
            break;
        }
    }
    return 2.0 * static_cast<double>(lcs_depth) / static_cast<double>(pa.size() + pb.size());
}

std::size_t ProximityGraph::index_of(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw UnknownLabel(label);
    return static_cast<std::size_t>(it - labels.begin());
}

void ProximityGraph::validate() const {
    const std::size_t q = labels.size();
    if (q == 0) throw std::invalid_argument("proximity graph: no labels");
    if (adjacency.size() != q * q) throw std::invalid_argument("proximity graph: adjacency is not q x q");
    std::set<std::string> unique(labels.begin(), labels.end());
    if (unique.size() != q) throw std::invalid_argument("proximity graph: duplicate labels");
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("proximity graph: theta outside [0,1]");
    for (std::size_t i = 0; i < q; ++i) {
        if (at(i, i) != 1.0) throw std::invalid_argument("proximity graph: diagonal entry is not 1");
        for (std::size_t j = 0; j < q; ++j) {
            const double v = at(i, j);
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("proximity graph: entry " + format_double(v) + " outside [0,1]");
            }
            if (std::fabs(v - at(j, i)) > 1e-12) throw std::invalid_argument("proximity graph: matrix is not symmetric");
        }
    }
}

ProximityGraph build_wup_graph(const Taxonomy& taxonomy, const std::vector<std::string>& categories, double theta) {
    ProximityGraph g{categories, std::vector<double>(categories.size() * categories.size()), theta};
    for (const auto& c : categories) {
        if (!taxonomy.contains(c)) throw UnknownLabel(c);
    }
    const std::size_t q = categories.size();
    for (std::size_t i = 0; i < q; ++i) {
        g.adjacency[i * q + i] = 1.0;
        for (std::size_t j = i + 1; j < q; ++j) {
            const double s = wup_similarity(taxonomy, categories[i], categories[j]);
            g.adjacency[i * q + j] = g.adjacency[j * q + i] = s;
        }
    }
    return g;
}

CooccurrenceCorpus CooccurrenceCorpus::parse(std::istream& in) {
    CooccurrenceCorpus corpus;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> record;
        if (!text::trim(line).empty()) {
            for (auto& label : text::split(line, ',')) {
                if (!label.empty()) record.push_back(std::move(label));
            }
        }
        corpus.records.push_back(std::move(record));
    }
    return corpus;
}

CooccurrenceCorpus CooccurrenceCorpus::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    return parse(in);
}

std::vector<std::size_t> cooccurrence_counts(const CooccurrenceCorpus& corpus, const std::vector<std::string>& categories) {
    const std::size_t q = categories.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < q; ++i) index.emplace(categories[i], i);
    std::vector<std::size_t> counts(q * q, 0);
    for (const auto& record : corpus.records) {
        std::set<std::size_t> present;
        for (const auto& label : record) {
            auto it = index.find(label);
            if (it == index.end()) throw UnknownLabel(label);
            present.insert(it->second);
        }
        for (auto i : present)
            for (auto j : present)
                if (i != j) ++counts[i * q + j];
    }
    return counts;
}

ProximityGraph build_cooccurrence_graph(const CooccurrenceCorpus& corpus, const std::vector<std::string>& categories,
                                        double theta) {
    if (corpus.records.empty()) throw std::invalid_argument("co-occurrence corpus is empty");
    const auto counts = cooccurrence_counts(corpus, categories);
    const std::size_t normalizer = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    if (normalizer == 0) throw std::invalid_argument("co-occurrence corpus has no category pairs to normalize by");
    const std::size_t q = categories.size();
    ProximityGraph g{categories, std::vector<double>(q * q), theta};
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j)
            g.adjacency[i * q + j] =
                i == j ? 1.0 : static_cast<double>(counts[i * q + j]) / static_cast<double>(normalizer);
    return g;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_graph(std::ostream& out, const ProximityGraph& graph) {
    graph.validate();
    out << "GRAPH1\n";
    for (std::size_t i = 0; i < graph.size(); ++i) out << (i ? "," : "") << graph.labels[i];
    out << "\ntheta=" << format_double(graph.theta) << "\n";
    for (std::size_t i = 0; i < graph.size(); ++i) {
        for (std::size_t j = 0; j < graph.size(); ++j) out << (j ? "," : "") << format_double(graph.at(i, j));
        out << "\n";
    }
}

ProximityGraph read_graph(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != "GRAPH1") throw FormatError("graph: missing GRAPH1 header");
    ProximityGraph g;
    if (!std::getline(in, line)) throw FormatError("graph: missing label line");
    g.labels = text::split(line, ',');
    if (!std::getline(in, line)) throw FormatError("graph: missing theta line");
    auto t = text::trim(line);
    if (!t.starts_with("theta=")) throw FormatError("graph: expected theta=<value>");
    g.theta = text::parse_double(t.substr(6), "theta");
    const std::size_t q = g.labels.size();
    for (std::size_t i = 0; i < q; ++i) {
        if (!std::getline(in, line)) throw FormatError("graph: expected " + std::to_string(q) + " matrix rows");
        auto row = text::split(line, ',');
        if (row.size() != q) throw FormatError("graph: row " + std::to_string(i) + " has wrong length");
        for (const auto& cell : row) g.adjacency.push_back(text::parse_double(cell, "adjacency entry"));
    }
    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    return g;
}

void save_graph(const std::filesystem::path& path, const ProximityGraph& graph) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    write_graph(out, graph);
}

ProximityGraph load_graph(const std::filesystem::path& path, const std::optional<std::vector<std::string>>& expected_labels) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    auto g = read_graph(in);
    if (expected_labels && g.labels != *expected_labels) {
        throw FormatError(path.string() + ": graph labels do not match the category list");
    }
    return g;
}

std::vector<std::string> load_categories(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).starts_with("#")) continue;
        for (auto& label : text::split(line, ',')) {
            if (!label.empty()) out.push_back(std::move(label));
        }
    }
    if (out.empty()) throw FormatError(path.string() + ": no categories");
    return out;
}

}  // namespace semsal
