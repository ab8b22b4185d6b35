#include "bankgcn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "bankgcn/checkpoint.hpp"
#include "bankgcn/spectral.hpp"

namespace bankgcn {

const char* to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::CategoricalOneHot: return "categorical-onehot";
        case FeatureKind::Attributes: return "attributes";
        case FeatureKind::CategoricalAndAttributes: return "categorical+attributes";
        case FeatureKind::StructuralSynthetic: return "structural-synthetic";
    }
    return "unknown";
}

DatasetStats dataset_stats(const Dataset& ds) {
    DatasetStats st;
    st.graphs = ds.graphs.size();
    st.classes = ds.num_classes;
    st.feature_dim = ds.feature_dim();
    if (ds.graphs.empty()) return st;
    double nodes = 0.0;
    double edges = 0.0;
    for (const auto& g : ds.graphs) {
        nodes += static_cast<double>(g.num_nodes());
        edges += static_cast<double>(g.num_edges());
    }
    st.mean_nodes = nodes / static_cast<double>(st.graphs);
    st.mean_edges = edges / static_cast<double>(st.graphs);
    return st;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

struct TextFile {
    std::string path;
    std::vector<std::string> lines;
};

TextFile read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    TextFile file{path.string(), {}};
    std::string line;
    while (std::getline(in, line)) file.lines.push_back(line);
    while (!file.lines.empty() && trim(file.lines.back()).empty()) file.lines.pop_back();
    for (std::size_t i = 0; i < file.lines.size(); ++i) {
        if (trim(file.lines[i]).empty()) throw ParseError(file.path, i + 1, "blank line");
    }
    return file;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::int64_t parse_int(std::string_view field, const TextFile& file, std::size_t line) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(file.path, line, "expected an integer, got '" + std::string(field) + "'");
    }
    return value;
}

double parse_real(std::string_view field, const TextFile& file, std::size_t line) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(file.path, line, "expected a real number, got '" + std::string(field) + "'");
    }
    return value;
}

std::vector<std::int64_t> parse_int_column(const TextFile& file) {
    std::vector<std::int64_t> values;
    values.reserve(file.lines.size());
    for (std::size_t i = 0; i < file.lines.size(); ++i) {
        values.push_back(parse_int(trim(file.lines[i]), file, i + 1));
    }
    return values;
}

std::filesystem::path tu_path(const std::filesystem::path& dir, const std::string& name, const char* suffix) {
    return dir / (name + "_" + suffix + ".txt");
}

}  // namespace

Dataset parse_tu_dataset(const std::filesystem::path& directory, const std::string& name) {
    Dataset ds;
    ds.name = name;

    const TextFile indicator_file = read_lines(tu_path(directory, name, "graph_indicator"));
    const TextFile labels_file = read_lines(tu_path(directory, name, "graph_labels"));
    const TextFile edges_file = read_lines(tu_path(directory, name, "A"));

    const std::vector<std::int64_t> indicator = parse_int_column(indicator_file);
    const std::vector<std::int64_t> graph_labels = parse_int_column(labels_file);
    const std::size_t num_graphs = graph_labels.size();
    const std::size_t num_nodes = indicator.size();

    // Global node -> (graph, local id).
    std::vector<std::size_t> graph_of(num_nodes);
    std::vector<Index> local_of(num_nodes);
    std::vector<Index> graph_sizes(num_graphs, 0);
    for (std::size_t v = 0; v < num_nodes; ++v) {
        const std::int64_t gid = indicator[v];
        if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs) {
            throw ParseError(indicator_file.path, v + 1,
                             "graph id " + std::to_string(gid) + " outside 1.." + std::to_string(num_graphs));
        }
        graph_of[v] = static_cast<std::size_t>(gid - 1);
        local_of[v] = graph_sizes[graph_of[v]]++;
    }
    for (std::size_t k = 0; k < num_graphs; ++k) {
        if (graph_sizes[k] == 0) {
            throw ParseError(labels_file.path, k + 1, "graph " + std::to_string(k + 1) + " has no nodes");
        }
    }

    std::vector<std::set<std::pair<Index, Index>>> undirected(num_graphs);
    std::set<std::pair<std::int64_t, std::int64_t>> directed_seen;
    std::size_t repeated = 0;
    for (std::size_t i = 0; i < edges_file.lines.size(); ++i) {
        const auto fields = split_fields(edges_file.lines[i]);
        if (fields.size() != 2) throw ParseError(edges_file.path, i + 1, "expected 'i, j'");
        const std::int64_t a = parse_int(fields[0], edges_file, i + 1);
        const std::int64_t b = parse_int(fields[1], edges_file, i + 1);
        for (std::int64_t v : {a, b}) {
            if (v < 1 || static_cast<std::size_t>(v) > num_nodes) {
                throw ParseError(edges_file.path, i + 1,
                                 "node id " + std::to_string(v) + " outside 1.." + std::to_string(num_nodes));
            }
        }
        const std::size_t ga = graph_of[static_cast<std::size_t>(a - 1)];
        const std::size_t gb = graph_of[static_cast<std::size_t>(b - 1)];
        if (ga != gb) {
            throw ParseError(edges_file.path, i + 1,
                             "edge joins node " + std::to_string(a) + " of graph " + std::to_string(ga + 1) +
                                 " with node " + std::to_string(b) + " of graph " + std::to_string(gb + 1));
        }
        if (!directed_seen.insert({a, b}).second) ++repeated;
        const Index la = local_of[static_cast<std::size_t>(a - 1)];
        const Index lb = local_of[static_cast<std::size_t>(b - 1)];
        undirected[ga].insert({std::min(la, lb), std::max(la, lb)});
    }
    if (repeated > 0) {
        ds.warnings.push_back(edges_file.path + ": " + std::to_string(repeated) +
                              " repeated directed edge(s) coalesced");
    }

    // Node signals.
    std::vector<std::vector<std::int64_t>> unused;
    const auto node_labels_path = tu_path(directory, name, "node_labels");
    const auto attributes_path = tu_path(directory, name, "node_attributes");
    const bool has_labels = std::filesystem::exists(node_labels_path);
    const bool has_attributes = std::filesystem::exists(attributes_path);

    std::vector<std::int64_t> node_labels;
    if (has_labels) {
        const TextFile f = read_lines(node_labels_path);
        if (f.lines.size() != num_nodes) {
            throw ParseError(f.path, f.lines.size(), "expected " + std::to_string(num_nodes) + " node labels, found " +
                                                         std::to_string(f.lines.size()));
        }
        node_labels = parse_int_column(f);
        std::set<std::int64_t> alphabet(node_labels.begin(), node_labels.end());
        ds.node_label_values.assign(alphabet.begin(), alphabet.end());
        ds.label_channels = static_cast<Index>(ds.node_label_values.size());
    }

    Matrix attributes;
    if (has_attributes) {
        const TextFile f = read_lines(attributes_path);
        if (f.lines.size() != num_nodes) {
            throw ParseError(f.path, f.lines.size(), "expected " + std::to_string(num_nodes) +
                                                         " attribute rows, found " + std::to_string(f.lines.size()));
        }
        for (std::size_t v = 0; v < num_nodes; ++v) {
            const auto fields = split_fields(f.lines[v]);
            if (v == 0) {
                ds.attribute_channels = static_cast<Index>(fields.size());
                attributes.resize(static_cast<Index>(num_nodes), ds.attribute_channels);
            } else if (static_cast<Index>(fields.size()) != ds.attribute_channels) {
                throw ParseError(f.path, v + 1,
                                 "ragged attribute row: " + std::to_string(fields.size()) + " values, expected " +
                                     std::to_string(ds.attribute_channels));
            }
            for (std::size_t c = 0; c < fields.size(); ++c) {
                attributes(static_cast<Index>(v), static_cast<Index>(c)) = parse_real(fields[c], f, v + 1);
            }
        }
    }

    for (const char* ignored : {"edge_labels", "edge_attributes", "graph_attributes"}) {
        if (std::filesystem::exists(tu_path(directory, name, ignored))) {
            ds.warnings.push_back(tu_path(directory, name, ignored).string() + " ignored");
        }
    }

    // Graph labels, remapped by sorted order.
    {
        std::set<std::int64_t> values(graph_labels.begin(), graph_labels.end());
        ds.class_values.assign(values.begin(), values.end());
        ds.num_classes = static_cast<int>(ds.class_values.size());
    }
    std::map<std::int64_t, int> class_index;
    for (std::size_t k = 0; k < ds.class_values.size(); ++k) class_index[ds.class_values[k]] = static_cast<int>(k);
    std::map<std::int64_t, Index> node_label_index;
    for (std::size_t k = 0; k < ds.node_label_values.size(); ++k) {
        node_label_index[ds.node_label_values[k]] = static_cast<Index>(k);
    }

    // Group global nodes per graph in local order.
    std::vector<std::vector<std::size_t>> members(num_graphs);
    for (std::size_t v = 0; v < num_nodes; ++v) members[graph_of[v]].push_back(v);

    const Index width = ds.label_channels + ds.attribute_channels;
    std::vector<Graph> structural;
    ds.graphs.reserve(num_graphs);
    for (std::size_t k = 0; k < num_graphs; ++k) {
        const Index n = graph_sizes[k];
        Matrix x = Matrix::Zero(n, width);
        for (std::size_t v : members[k]) {
            const Index row = local_of[v];
            if (has_labels) x(row, node_label_index[node_labels[v]]) = 1.0;
            if (has_attributes) x.row(row).tail(ds.attribute_channels) = attributes.row(static_cast<Index>(v));
        }
        std::vector<Edge> edges;
        edges.reserve(undirected[k].size());
        for (const auto& [a, b] : undirected[k]) edges.push_back({a, b, 1.0});
        ds.graphs.push_back(build_graph(n, edges, std::move(x), class_index[graph_labels[k]]));
    }

    if (has_labels && has_attributes) {
        ds.feature_kind = FeatureKind::CategoricalAndAttributes;
    } else if (has_labels) {
        ds.feature_kind = FeatureKind::CategoricalOneHot;
    } else if (has_attributes) {
        ds.feature_kind = FeatureKind::Attributes;
    } else {
        ds.feature_kind = FeatureKind::StructuralSynthetic;
        Index max_degree = 0;
        for (const auto& g : ds.graphs) {
            for (Index r = 0; r < g.num_nodes(); ++r) {
                Index deg = 0;
                for (SparseMatrix::InnerIterator it(g.adjacency(), r); it; ++it) deg += it.col() != r ? 1 : 0;
                max_degree = std::max(max_degree, deg);
            }
        }
        ds.max_degree = max_degree;
        for (auto& g : ds.graphs) g = with_features(g, synthesize_structural_features(g, max_degree));
    }
    return ds;
}

void write_tu_dataset(const Dataset& ds, const std::filesystem::path& directory, const std::string& name) {
    std::filesystem::create_directories(directory);
    std::ostringstream edges, indicator, graph_labels, node_labels, attributes;
    attributes << std::setprecision(17);
    std::int64_t base = 1;
    for (std::size_t k = 0; k < ds.graphs.size(); ++k) {
        const Graph& g = ds.graphs[k];
        for (Index r = 0; r < g.num_nodes(); ++r) {
            for (SparseMatrix::InnerIterator it(g.adjacency(), r); it; ++it) {
                edges << base + r << ", " << base + it.col() << '\n';
            }
            indicator << k + 1 << '\n';
            const auto row = g.features().row(r);
            if (ds.label_channels > 0) {
                Index which = 0;
                row.head(ds.label_channels).maxCoeff(&which);
                node_labels << ds.node_label_values[static_cast<std::size_t>(which)] << '\n';
            }
            if (ds.attribute_channels > 0) {
                for (Index c = 0; c < ds.attribute_channels; ++c) {
                    attributes << (c ? ", " : "") << row[ds.label_channels + c];
                }
                attributes << '\n';
            }
        }
        graph_labels << ds.class_values[static_cast<std::size_t>(g.label())] << '\n';
        base += g.num_nodes();
    }
    write_file_atomic(tu_path(directory, name, "A"), edges.str());
    write_file_atomic(tu_path(directory, name, "graph_indicator"), indicator.str());
    write_file_atomic(tu_path(directory, name, "graph_labels"), graph_labels.str());
    if (ds.label_channels > 0) write_file_atomic(tu_path(directory, name, "node_labels"), node_labels.str());
    if (ds.attribute_channels > 0) write_file_atomic(tu_path(directory, name, "node_attributes"), attributes.str());
}

Dataset normalize_attributes(const Dataset& ds) {
    Dataset out = ds;
    if (ds.attribute_channels == 0 || ds.graphs.empty()) return out;
    const Index first = ds.label_channels;
    const Index count = ds.attribute_channels;
    Eigen::RowVectorXd lo = Eigen::RowVectorXd::Constant(count, std::numeric_limits<double>::infinity());
    Eigen::RowVectorXd hi = Eigen::RowVectorXd::Constant(count, -std::numeric_limits<double>::infinity());
    for (const auto& g : ds.graphs) {
        const auto block = g.features().middleCols(first, count);
        lo = lo.cwiseMin(block.colwise().minCoeff());
        hi = hi.cwiseMax(block.colwise().maxCoeff());
    }
    for (auto& g : out.graphs) {
        Matrix x = g.features();
        for (Index c = 0; c < count; ++c) {
            const double range = hi[c] - lo[c];
            auto column = x.col(first + c);
            if (range > 0.0) {
                column = ((column.array() - lo[c]) / range).matrix();
            } else {
                column.setZero();
            }
        }
        g = with_features(g, std::move(x));
    }
    return out;
}

Matrix synthesize_structural_features(const Graph& g, Index max_degree) {
    const Index n = g.num_nodes();
    std::vector<std::vector<Index>> neighbors(static_cast<std::size_t>(n));
    for (Index r = 0; r < n; ++r) {
        for (SparseMatrix::InnerIterator it(g.adjacency(), r); it; ++it) {
            if (it.col() != r) neighbors[static_cast<std::size_t>(r)].push_back(it.col());
        }
    }
    Matrix x = Matrix::Zero(n, max_degree + 2);
    for (Index r = 0; r < n; ++r) {
        const auto& nb = neighbors[static_cast<std::size_t>(r)];
        const auto deg = static_cast<Index>(nb.size());
        x(r, std::min(deg, max_degree)) = 1.0;
        if (deg < 2) continue;
        Index triangles = 0;
        for (std::size_t a = 0; a < nb.size(); ++a) {
            for (std::size_t b = a + 1; b < nb.size(); ++b) {
                if (g.adjacency().coeff(nb[a], nb[b]) != 0.0) ++triangles;
            }
        }
        x(r, max_degree + 1) = 2.0 * static_cast<double>(triangles) / static_cast<double>(deg * (deg - 1));
    }
    return x;
}

namespace {

// Assigns each class's leftover units (after flooring quotas) to distinct splits so
// that split totals hit their targets. Small bipartite flow: greedy by largest
// fractional part, then augmenting paths.
std::vector<std::array<int, 3>> distribute_remainders(const std::vector<int>& supply,
                                                      const std::vector<std::array<double, 3>>& fractions,
                                                      std::array<int, 3> demand) {
    const std::size_t classes = supply.size();
    std::vector<std::array<int, 3>> extra(classes, {0, 0, 0});
    std::vector<int> left = supply;

    std::vector<std::tuple<double, std::size_t, int>> order;
    for (std::size_t c = 0; c < classes; ++c)
        for (int t = 0; t < 3; ++t) order.emplace_back(-fractions[c][static_cast<std::size_t>(t)], c, t);
    std::sort(order.begin(), order.end());
    for (const auto& [neg_frac, c, t] : order) {
        if (left[c] > 0 && demand[static_cast<std::size_t>(t)] > 0) {
            extra[c][static_cast<std::size_t>(t)] = 1;
            --left[c];
            --demand[static_cast<std::size_t>(t)];
        }
    }

    // Augment: move a unit from class c (with supply left) to an unmet split via alternating paths.
    auto augment = [&](std::size_t start) {
        // BFS over classes; an edge c -> t is free when extra[c][t] == 0, and t -> c' when extra[c'][t] == 1.
        std::vector<int> prev_split(classes, -1);
        std::vector<std::size_t> prev_class(classes, classes);
        std::vector<char> seen(classes, 0);
        std::vector<std::size_t> queue{start};
        seen[start] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::size_t c = queue[head];
            for (std::size_t t = 0; t < 3; ++t) {
                if (extra[c][t]) continue;
                if (demand[t] > 0) {
                    // Unwind the path.
                    std::size_t cur = c;
                    std::size_t split = t;
                    while (true) {
                        extra[cur][split] = 1;
                        if (cur == start) break;
                        const auto back = static_cast<std::size_t>(prev_split[cur]);
                        extra[cur][back] = 0;
                        split = back;
                        cur = prev_class[cur];
                    }
                    --demand[t];
                    --left[start];
                    return true;
                }
                for (std::size_t c2 = 0; c2 < classes; ++c2) {
                    if (!seen[c2] && extra[c2][t]) {
                        seen[c2] = 1;
                        prev_split[c2] = static_cast<int>(t);
                        prev_class[c2] = c;
                        queue.push_back(c2);
                    }
                }
            }
        }
        return false;
    };
    for (std::size_t c = 0; c < classes; ++c) {
        while (left[c] > 0) {
            if (!augment(c)) throw SplitError("stratified_split: cannot meet split sizes under stratification");
        }
    }
    return extra;
}

}  // namespace

SplitIndices stratified_split(std::span<const int> labels, std::array<double, 3> ratios, std::uint64_t seed) {
    const double ratio_sum = ratios[0] + ratios[1] + ratios[2];
    if (ratios[0] < 0.0 || ratios[1] < 0.0 || ratios[2] < 0.0 || std::abs(ratio_sum - 1.0) > 1e-9) {
        throw SplitError("stratified_split: ratios must be non-negative and sum to 1");
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [label, members] : by_class) {
        if (members.size() < 3) {
            throw SplitError("stratified_split: class " + std::to_string(label) + " has " +
                             std::to_string(members.size()) + " member(s), need at least 3");
        }
    }

    const auto total = static_cast<double>(labels.size());
    const auto train_target = static_cast<int>(std::llround(ratios[0] * total));
    const auto val_target = static_cast<int>(std::llround(ratios[1] * total));
    const int test_target = static_cast<int>(labels.size()) - train_target - val_target;
    if (test_target < 0) throw SplitError("stratified_split: ratios leave a negative test size");
    const std::array<int, 3> targets{train_target, val_target, test_target};

    std::vector<std::array<int, 3>> base;
    std::vector<std::array<double, 3>> fractions;
    std::vector<int> supply;
    std::array<int, 3> demand = targets;
    for (const auto& [label, members] : by_class) {
        std::array<int, 3> floors{};
        std::array<double, 3> frac{};
        int assigned = 0;
        for (std::size_t t = 0; t < 3; ++t) {
            const double quota = ratios[t] * static_cast<double>(members.size());
            floors[t] = static_cast<int>(std::floor(quota + 1e-9));
            frac[t] = std::max(0.0, quota - floors[t]);
            assigned += floors[t];
            demand[t] -= floors[t];
        }
        base.push_back(floors);
        fractions.push_back(frac);
        supply.push_back(static_cast<int>(members.size()) - assigned);
    }
    for (int d : demand) {
        if (d < 0) throw SplitError("stratified_split: cannot meet split sizes under stratification");
    }
    const auto extra = distribute_remainders(supply, fractions, demand);

    std::mt19937_64 rng(seed);
    SplitIndices split;
    std::size_t c = 0;
    for (auto& [label, members] : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        const auto n_train = static_cast<std::size_t>(base[c][0] + extra[c][0]);
        const auto n_val = static_cast<std::size_t>(base[c][1] + extra[c][1]);
        split.train.insert(split.train.end(), members.begin(), members.begin() + n_train);
        split.val.insert(split.val.end(), members.begin() + n_train, members.begin() + n_train + n_val);
        split.test.insert(split.test.end(), members.begin() + n_train + n_val, members.end());
        ++c;
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<int> labels_of(std::span<const Graph> graphs) {
    std::vector<int> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(g.label());
    return out;
}

std::vector<Graph> select(std::span<const Graph> graphs, std::span<const std::size_t> indices) {
    std::vector<Graph> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(graphs[i]);
    return out;
}

std::vector<SyntheticSample> synthetic_spectral_samples(std::size_t n_graphs, Index nodes_per_graph, std::uint64_t seed,
                                                        const SyntheticOptions& options) {
    if (nodes_per_graph < 8) throw DomainError("synthetic_spectral_dataset: need at least 8 nodes per graph");
    if (options.band < 1 || 2 * options.band > nodes_per_graph) {
        throw DomainError("synthetic_spectral_dataset: band must fit twice into the node count");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Index n = nodes_per_graph;

    std::vector<SyntheticSample> samples;
    samples.reserve(n_graphs);
    for (std::size_t k = 0; k < n_graphs; ++k) {
        const int label = static_cast<int>(k % 2);
        // Random spanning tree keeps the graph connected; extra edges are i.i.d.
        std::vector<Edge> edges;
        std::set<std::pair<Index, Index>> present;
        for (Index v = 1; v < n; ++v) {
            const auto parent = static_cast<Index>(unit(rng) * static_cast<double>(v));
            edges.push_back({parent, v, 1.0});
            present.insert({parent, v});
        }
        for (Index a = 0; a < n; ++a) {
            for (Index b = a + 1; b < n; ++b) {
                if (unit(rng) < options.edge_probability && !present.count({a, b})) {
                    edges.push_back({a, b, 1.0});
                    present.insert({a, b});
                }
            }
        }
        Graph g = build_graph(n, edges, Matrix::Zero(n, 1), label);
        const SpectralBasis basis = eig_laplacian(g);
        const Index first = label == 0 ? 0 : n - options.band;
        Vector signal = Vector::Zero(n);
        for (Index j = 0; j < options.band; ++j) signal += gauss(rng) * basis.eigenvectors.col(first + j);
        const double rms = std::sqrt(signal.squaredNorm() / static_cast<double>(n));
        if (rms > 0.0) signal /= rms;
        Matrix x(n, 1);
        for (Index i = 0; i < n; ++i) x(i, 0) = signal[i] + options.noise_sigma * gauss(rng);
        samples.push_back({with_features(g, std::move(x)), std::move(signal)});
    }
    return samples;
}

Dataset synthetic_spectral_dataset(std::size_t n_graphs, Index nodes_per_graph, std::uint64_t seed,
                                   const SyntheticOptions& options) {
    Dataset ds;
    ds.name = "synthetic-spectral";
    ds.num_classes = 2;
    ds.class_values = {0, 1};
    ds.feature_kind = FeatureKind::Attributes;
    ds.attribute_channels = 1;
    for (auto& s : synthetic_spectral_samples(n_graphs, nodes_per_graph, seed, options)) {
        ds.graphs.push_back(std::move(s.graph));
    }
    return ds;
}

}  // namespace bankgcn
