#include "eegraph/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "eegraph/rng.hpp"
#include "eegraph/wl.hpp"

namespace eegraph {

std::string to_string(ConvKind k) {
  switch (k) {
    case ConvKind::GraphSage: return "graphsage";
    case ConvKind::Gin: return "gin";
    case ConvKind::PolyFilter: return "polyfilter";
  }
  return "?";
}

std::string to_string(PoolKind k) {
  switch (k) {
    case PoolKind::Sum: return "sum";
    case PoolKind::Mean: return "mean";
    case PoolKind::Max: return "max";
    case PoolKind::SortPool: return "sortpool";
    case PoolKind::EdgePool: return "edgepool";
    case PoolKind::SagPool: return "sagpool";
    case PoolKind::Set2Set: return "set2set";
  }
  return "?";
}

ConvKind parse_conv_kind(const std::string& s) {
  if (s == "graphsage") return ConvKind::GraphSage;
  if (s == "gin") return ConvKind::Gin;
  if (s == "polyfilter") return ConvKind::PolyFilter;
  throw std::invalid_argument("unknown conv layer '" + s +
                              "' (expected graphsage, gin, polyfilter)");
}

PoolKind parse_pool_kind(const std::string& s) {
  if (s == "sum") return PoolKind::Sum;
  if (s == "mean") return PoolKind::Mean;
  if (s == "max") return PoolKind::Max;
  if (s == "sortpool") return PoolKind::SortPool;
  if (s == "edgepool") return PoolKind::EdgePool;
  if (s == "sagpool") return PoolKind::SagPool;
  if (s == "set2set") return PoolKind::Set2Set;
  throw std::invalid_argument(
      "unknown pooling '" + s +
      "' (expected sum, mean, max, sortpool, edgepool, sagpool, set2set)");
}

Network::Network(const ModelSpec& spec, Graph graph, std::size_t channels,
                 std::size_t samples, std::size_t n_classes,
                 std::uint64_t seed)
    : spec_(spec),
      graph_(std::move(graph)),
      channels_(channels),
      samples_(samples),
      n_classes_(n_classes) {
  if (graph_.node_count() != channels_)
    throw std::invalid_argument(
        "network: graph has " + std::to_string(graph_.node_count()) +
        " nodes but trials have " + std::to_string(channels_) + " channels");
  if (spec_.depth < 1)
    throw std::invalid_argument("network: depth must be >= 1");
  auto rng = make_rng(seed, "init");

  std::size_t feat = samples_;
  if (spec_.compress) {
    compressor_ = std::make_unique<Compressor>(channels_, samples_, rng);
    feat = Compressor::kTargetFeatures;
  }

  std::size_t width = feat;
  for (std::size_t d = 0; d < spec_.depth; ++d) {
    switch (spec_.conv) {
      case ConvKind::GraphSage:
        sage_layers_.emplace_back(width, spec_.hidden, rng);
        break;
      case ConvKind::Gin:
        gin_layers_.emplace_back(width, spec_.gin_mlp_hidden, spec_.hidden,
                                 rng);
        break;
      case ConvKind::PolyFilter:
        poly_layers_.emplace_back(spec_.poly_taps, width, spec_.hidden, rng);
        break;
    }
    width = spec_.hidden;
  }

  std::size_t emb = width;
  switch (spec_.pool) {
    case PoolKind::Sum:
      // GIN's graph embedding concatenates sum readouts of every round,
      // round 0 (width feat) included
      if (spec_.conv == ConvKind::Gin)
        emb = feat + spec_.depth * spec_.hidden;
      break;
    case PoolKind::Mean:
    case PoolKind::Max:
      break;
    case PoolKind::SortPool:
      sortpool_ = SortPool(spec_.sortpool_rho, spec_.depth, spec_.hidden,
                           spec_.sortpool_filters, rng);
      emb = spec_.sortpool_filters;
      if (spec_.sortpool_wl_order) {
        const auto coloring = wl_refine(graph_);
        const auto& colors = coloring.final_colors();
        std::vector<std::size_t> order(colors.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                           if (colors[a] != colors[b])
                             return colors[a] > colors[b];
                           return a < b;
                         });
        wl_sort_order_ = std::move(order);
      }
      break;
    case PoolKind::EdgePool:
      edgepool_ = EdgePool(width, rng);
      break;
    case PoolKind::SagPool:
      sagpool_ = SagPool(width, spec_.sag_rho, rng);
      break;
    case PoolKind::Set2Set:
      set2set_ = Set2Set(width, spec_.hidden, rng);
      set2set_.steps = spec_.set2set_steps;
      emb = spec_.hidden;
      break;
  }

  head1_ = Dense(emb, spec_.head_hidden, rng);
  head2_ = Dense(spec_.head_hidden, n_classes_, rng);

  if (compressor_) compressor_->collect("compressor", params_);
  for (std::size_t d = 0; d < sage_layers_.size(); ++d)
    sage_layers_[d].collect("sage" + std::to_string(d), params_);
  for (std::size_t d = 0; d < gin_layers_.size(); ++d)
    gin_layers_[d].collect("gin" + std::to_string(d), params_);
  for (std::size_t d = 0; d < poly_layers_.size(); ++d)
    poly_layers_[d].collect("poly" + std::to_string(d), params_);
  if (spec_.pool == PoolKind::SortPool) sortpool_.collect("sortpool", params_);
  if (spec_.pool == PoolKind::EdgePool) edgepool_.collect("edgepool", params_);
  if (spec_.pool == PoolKind::SagPool) sagpool_.collect("sagpool", params_);
  if (spec_.pool == PoolKind::Set2Set) set2set_.collect("set2set", params_);
  head1_.collect("head1", params_);
  head2_.collect("head2", params_);
}

Tensor Network::node_features(const Tensor& trial, bool training) {
  if (trial.rank() != 2 || trial.shape()[0] != channels_ ||
      trial.shape()[1] != samples_)
    throw std::invalid_argument("network: trial " +
                                shape_to_string(trial.shape()) +
                                " does not match " + std::to_string(channels_) +
                                "x" + std::to_string(samples_));
  return compressor_ ? compressor_->forward(trial, training) : trial;
}

Tensor Network::graph_embedding(const Tensor& X) {
  std::vector<Tensor> rounds{X};
  Tensor h = X;
  for (std::size_t d = 0; d < spec_.depth; ++d) {
    switch (spec_.conv) {
      case ConvKind::GraphSage: h = sage_layers_[d].forward(graph_, h); break;
      case ConvKind::Gin: h = gin_layers_[d].forward(graph_, h); break;
      case ConvKind::PolyFilter:
        h = poly_layers_[d].forward(graph_.shift_operator(spec_.shift), h);
        break;
    }
    rounds.push_back(h);
  }

  switch (spec_.pool) {
    case PoolKind::Sum:
      return spec_.conv == ConvKind::Gin ? gin_graph_embedding(rounds)
                                         : readout(h, ReadoutKind::Sum);
    case PoolKind::Mean: return readout(h, ReadoutKind::Mean);
    case PoolKind::Max: return readout(h, ReadoutKind::Max);
    case PoolKind::SortPool: {
      std::vector<Tensor> conv_rounds(rounds.begin() + 1, rounds.end());
      return sortpool_.forward(concat(conv_rounds, 1), wl_sort_order_);
    }
    case PoolKind::EdgePool: {
      const auto pooled = edgepool_.forward(graph_, h);
      return sum_rows(pooled.H);
    }
    case PoolKind::SagPool: {
      const auto pooled =
          sagpool_.forward(graph_.shift_operator(spec_.shift), h);
      return sum_rows(pooled.H);
    }
    case PoolKind::Set2Set: return set2set_.forward(h);
  }
  throw std::logic_error("graph_embedding: bad pool kind");
}

Tensor Network::forward(const Tensor& trial, bool training) {
  const Tensor emb = graph_embedding(node_features(trial, training));
  return head2_.forward(relu(head1_.forward(emb)));
}

Tensor Network::forward_batch(const std::vector<Tensor>& trials,
                              bool training) {
  if (trials.empty())
    throw std::invalid_argument("forward_batch: empty batch");
  std::vector<Tensor> logits;
  logits.reserve(trials.size());
  for (const auto& t : trials) logits.push_back(forward(t, training));
  return stack_rows(logits);
}

}  // namespace eegraph
