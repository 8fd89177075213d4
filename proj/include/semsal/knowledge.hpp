#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace semsal {

class UnknownLabel : public std::invalid_argument {
public:
    explicit UnknownLabel(const std::string& label) : std::invalid_argument("unknown label: " + label) {}
};

/// Rooted hypernym tree. Depths count nodes on the root path inclusively,
/// so depth(root) == 1.
class Taxonomy {
public:
    /// Builds from child -> parent edges; `root` has no parent. Throws
    /// FormatError on multiple parents, cycles or nodes not reaching root.
    Taxonomy(std::string root, const std::vector<std::pair<std::string, std::string>>& edges);

    /// Text form: one `child<TAB>parent` per line, root as `root<TAB>-`.
    static Taxonomy parse(std::istream& in);
    static Taxonomy load(const std::filesystem::path& path);

    const std::string& root() const { return root_; }
    bool contains(const std::string& label) const { return label == root_ || parent_.contains(label); }
    std::optional<std::string> parent(const std::string& label) const;
    std::size_t depth(const std::string& label) const;
    /// Path from `label` up to and including the root.
    std::vector<std::string> ancestors(const std::string& label) const;
    std::vector<std::string> nodes() const;

private:
    std::string root_;
    std::map<std::string, std::string> parent_;
};

/// Wu-Palmer similarity: 2 depth(lcs) / (depth(a) + depth(b)).
double wup_similarity(const Taxonomy& taxonomy, const std::string& a, const std::string& b);

/// Symmetric category-level proximity with unit diagonal, plus the edge
/// threshold used when the graph supervises a predictor.
struct ProximityGraph {
    std::vector<std::string> labels;
    std::vector<double> adjacency;  // q x q row-major
    double theta = 0.0;

    std::size_t size() const { return labels.size(); }
    double at(std::size_t i, std::size_t j) const { return adjacency[i * labels.size() + j]; }
    std::size_t index_of(const std::string& label) const;
    double between(const std::string& a, const std::string& b) const { return at(index_of(a), index_of(b)); }

    /// Throws std::invalid_argument when symmetry, unit diagonal or [0,1]
    /// range is violated.
    void validate() const;

    bool operator==(const ProximityGraph&) const = default;
};

inline constexpr double kWupTheta = 0.5;
inline constexpr double kCooccurrenceTheta = 0.3;

ProximityGraph build_wup_graph(const Taxonomy& taxonomy, const std::vector<std::string>& categories,
                               double theta = kWupTheta);

/// Per-image category label multisets.
struct CooccurrenceCorpus {
    std::vector<std::vector<std::string>> records;

    /// One record per line, comma separated; blank lines are empty records.
    static CooccurrenceCorpus parse(std::istream& in);
    static CooccurrenceCorpus load(const std::filesystem::path& path);
};

/// Pair counts by image-level presence, normalized by the largest
/// off-diagonal count.
ProximityGraph build_cooccurrence_graph(const CooccurrenceCorpus& corpus, const std::vector<std::string>& categories,
                                        double theta = kCooccurrenceTheta);

/// Raw presence-based pair counts (q x q, zero diagonal).
std::vector<std::size_t> cooccurrence_counts(const CooccurrenceCorpus& corpus,
                                             const std::vector<std::string>& categories);

// GRAPH1 text format: header, comma-separated labels, `theta=<v>`, then q rows.
void write_graph(std::ostream& out, const ProximityGraph& graph);
ProximityGraph read_graph(std::istream& in);
void save_graph(const std::filesystem::path& path, const ProximityGraph& graph);
/// When `expected_labels` is given, a file over different labels is rejected.
ProximityGraph load_graph(const std::filesystem::path& path,
                          const std::optional<std::vector<std::string>>& expected_labels = std::nullopt);

/// Comma- or newline-separated label list.
std::vector<std::string> load_categories(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace semsal
