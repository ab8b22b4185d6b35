#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bankgcn/graph.hpp"

namespace bankgcn {

enum class FeatureKind {
    CategoricalOneHot,
    Attributes,
    CategoricalAndAttributes,
    StructuralSynthetic,
};

const char* to_string(FeatureKind kind);

/// A labelled graph collection with uniform feature width.
///
/// Node features are laid out as [one-hot node labels | attributes] or, when a
/// dataset has neither, [degree one-hot | clustering coefficient].
struct Dataset {
    std::vector<Graph> graphs;
    std::string name;
    int num_classes = 0;
    FeatureKind feature_kind = FeatureKind::Attributes;

    /// class_values[k] is the original graph label mapped to class k.
    std::vector<std::int64_t> class_values;
    /// Sorted node label alphabet behind the one-hot block.
    std::vector<std::int64_t> node_label_values;
    Index label_channels = 0;
    Index attribute_channels = 0;
    /// Width parameter of the degree one-hot (structural features only).
    Index max_degree = 0;
    std::vector<std::string> warnings;

    Index feature_dim() const noexcept { return graphs.empty() ? 0 : graphs.front().feature_dim(); }
};

struct DatasetStats {
    std::size_t graphs = 0;
    int classes = 0;
    double mean_nodes = 0.0;
    double mean_edges = 0.0;
    Index feature_dim = 0;
};

DatasetStats dataset_stats(const Dataset& ds);

/// Reads {name}_A.txt, {name}_graph_indicator.txt, {name}_graph_labels.txt and the
/// optional {name}_node_labels.txt / {name}_node_attributes.txt from `directory`.
Dataset parse_tu_dataset(const std::filesystem::path& directory, const std::string& name);

/// Inverse of parse_tu_dataset for datasets it produced (or synthetic ones).
void write_tu_dataset(const Dataset& ds, const std::filesystem::path& directory, const std::string& name);

/// Min-max scales each attribute column to [0, 1] over the whole dataset; constant columns become 0.
Dataset normalize_attributes(const Dataset& ds);

/// Per node: one-hot of min(degree, max_degree) over 0..max_degree, then the local clustering coefficient.
Matrix synthesize_structural_features(const Graph& g, Index max_degree);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Seeded stratified split. Split sizes are round-half-away(ratio * N) for train and
/// validation, with the rest in test; each class's share of every split is within one
/// graph of ratio * class size.
SplitIndices stratified_split(std::span<const int> labels, std::array<double, 3> ratios, std::uint64_t seed);

std::vector<int> labels_of(std::span<const Graph> graphs);
std::vector<Graph> select(std::span<const Graph> graphs, std::span<const std::size_t> indices);

struct SyntheticSample {
    Graph graph;
    Vector clean_signal;  ///< before noise
};

struct SyntheticOptions {
    double edge_probability = 0.2;
    double noise_sigma = 0.05;
    int band = 3;  ///< eigenvectors per class band
};

/// Random connected graphs carrying a single-channel signal drawn from the `band`
/// lowest (class 0) or highest (class 1) Laplacian eigenvectors, scaled to unit mean
/// square per node, plus Gaussian noise. Labels alternate so classes are balanced.
std::vector<SyntheticSample> synthetic_spectral_samples(std::size_t n_graphs, Index nodes_per_graph, std::uint64_t seed,
                                                        const SyntheticOptions& options = {});
Dataset synthetic_spectral_dataset(std::size_t n_graphs, Index nodes_per_graph, std::uint64_t seed,
                                   const SyntheticOptions& options = {});

}  // namespace bankgcn
