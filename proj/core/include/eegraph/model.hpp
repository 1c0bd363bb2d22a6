#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eegraph/compressor.hpp"
#include "eegraph/graph.hpp"
#include "eegraph/layers.hpp"
#include "eegraph/params.hpp"
#include "eegraph/pooling.hpp"
#include "eegraph/tensor.hpp"

namespace eegraph {

enum class ConvKind { GraphSage, Gin, PolyFilter };
enum class PoolKind { Sum, Mean, Max, SortPool, EdgePool, SagPool, Set2Set };

std::string to_string(ConvKind k);
std::string to_string(PoolKind k);
ConvKind parse_conv_kind(const std::string& s);
PoolKind parse_pool_kind(const std::string& s);

/// Declarative network description: compression front-end, conv stack,
/// pooling stage, classifier head.
struct ModelSpec {
  ConvKind conv = ConvKind::Gin;
  std::size_t depth = 2;           // graph conv layers
  std::size_t hidden = 32;         // conv output width
  std::size_t gin_mlp_hidden = 32;
  std::size_t poly_taps = 2;       // PolyFilter K
  ShiftOperatorKind shift = ShiftOperatorKind::NormalizedAdjacency;
  PoolKind pool = PoolKind::Sum;
  double sag_rho = 0.5;
  std::size_t sortpool_rho = 8;
  std::size_t sortpool_filters = 16;
  bool sortpool_wl_order = false;  // order by structural WL colors instead
  std::size_t set2set_steps = 3;
  std::size_t head_hidden = 32;
  bool compress = true;            // temporal compression front-end
};

/// A full trial classifier bound to one electrode graph. Forward maps a
/// (channels x samples) trial to class logits.
class Network {
 public:
  Network(const ModelSpec& spec, Graph graph, std::size_t channels,
          std::size_t samples, std::size_t n_classes, std::uint64_t seed);

  Tensor forward(const Tensor& trial, bool training);
  /// Logit rows for a batch of trials (stacked single-trial forwards).
  Tensor forward_batch(const std::vector<Tensor>& trials, bool training);

  ParamList& params() { return params_; }
  const ParamList& params() const { return params_; }
  std::size_t param_count() const { return count_learnable(params_); }

  const ModelSpec& spec() const { return spec_; }
  const Graph& graph() const { return graph_; }
  std::size_t n_classes() const { return n_classes_; }
  std::size_t channels() const { return channels_; }
  std::size_t samples() const { return samples_; }

 private:
  Tensor node_features(const Tensor& trial, bool training);
  Tensor graph_embedding(const Tensor& X);

  ModelSpec spec_;
  Graph graph_;
  std::size_t channels_, samples_, n_classes_;

  std::unique_ptr<Compressor> compressor_;
  std::vector<GraphSageLayer> sage_layers_;
  std::vector<GinLayer> gin_layers_;
  std::vector<PolyFilterBank> poly_layers_;
  SortPool sortpool_;
  EdgePool edgepool_;
  SagPool sagpool_;
  Set2Set set2set_;
  std::optional<std::vector<std::size_t>> wl_sort_order_;
  Dense head1_, head2_;
  ParamList params_;
};

}  // namespace eegraph
