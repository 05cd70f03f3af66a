/*
 * Copyright 2026 The trafficseq Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "trafficseq/neuralseq/params.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "trafficseq/error.hpp"

namespace trafficseq::neuralseq {

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::rnn:
      return "rnn";
    case ModelKind::lstm:
      return "lstm";
    case ModelKind::gru:
      return "gru";
    case ModelKind::lstm_en_de:
      return "lstm-ed";
    case ModelKind::lstm_en_de_atn:
      return "lstm-ed-attn";
  }
  return "unknown";
}

std::string_view display_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::rnn:
      return "RNN";
    case ModelKind::lstm:
      return "LSTM";
    case ModelKind::gru:
      return "GRU";
    case ModelKind::lstm_en_de:
      return "LSTM En_De";
    case ModelKind::lstm_en_de_atn:
      return "LSTM En_De_Atn";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "rnn") return ModelKind::rnn;
  if (text == "lstm") return ModelKind::lstm;
  if (text == "gru") return ModelKind::gru;
  if (text == "lstm-ed" || text == "lstm_en_de") return ModelKind::lstm_en_de;
  if (text == "lstm-ed-attn" || text == "lstm_en_de_atn") return ModelKind::lstm_en_de_atn;
  throw Error("neuralseq", "unknown model kind '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  if (window_w < 1) throw Error("neuralseq", "window_w must be >= 1");
  if (hidden_size < 1) throw Error("neuralseq", "hidden_size must be >= 1");
  if (epochs < 1) throw Error("neuralseq", "epochs must be >= 1");
  if (batch_size < 1) throw Error("neuralseq", "batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error("neuralseq", "learning_rate must be positive");
  }
  if (!(grad_clip > 0.0)) throw Error("neuralseq", "grad_clip must be positive");
}

void ParamLayout::add(std::string name, std::size_t rows, std::size_t cols) {
  tensors_.push_back(TensorInfo{std::move(name), rows, cols, total_});
  total_ += rows * cols;
}

ParamLayout ParamLayout::for_config(const ModelConfig& config) {
  config.validate();
  const std::size_t h = config.hidden_size;
  ParamLayout l;
  auto cell = [&](const std::string& prefix, std::size_t gates) {
    l.add(prefix + ".W_x", gates * h, 1);
    l.add(prefix + ".W_h", gates * h, h);
    l.add(prefix + ".b", gates * h, 1);
  };
  switch (config.kind) {
    case ModelKind::rnn:
      cell("rnn", 1);
      break;
    case ModelKind::lstm:
      cell("lstm", 4);
      break;
    case ModelKind::gru:
      cell("gru", 3);
      break;
    case ModelKind::lstm_en_de:
      cell("enc", 4);
      cell("dec", 4);
      break;
    case ModelKind::lstm_en_de_atn:
      cell("enc", 4);
      cell("dec", 4);
      l.add("attn.W_enc", h, h);
      l.add("attn.W_dec", h, h);
      l.add("attn.v", h, 1);
      break;
  }
  const std::size_t head_in = config.kind == ModelKind::lstm_en_de_atn ? 2 * h : h;
  l.add("out.W", 1, head_in);
  l.add("out.b", 1, 1);
  return l;
}

const TensorInfo& ParamLayout::find(std::string_view name) const {
  for (const TensorInfo& t : tensors_) {
    if (t.name == name) return t;
  }
  throw Error("neuralseq", "no tensor named '" + std::string(name) + "'");
}

bool ParamLayout::contains(std::string_view name) const noexcept {
  return std::any_of(tensors_.begin(), tensors_.end(),
                     [&](const TensorInfo& t) { return t.name == name; });
}

std::span<double> CellParams::tensor(std::string_view name) {
  const TensorInfo& t = layout.find(name);
  return std::span<double>(values).subspan(t.offset, t.size());
}

std::span<const double> CellParams::tensor(std::string_view name) const {
  const TensorInfo& t = layout.find(name);
  return std::span<const double>(values).subspan(t.offset, t.size());
}

bool CellParams::all_finite() const noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

CellParams zeros(const ParamLayout& layout) {
  return CellParams{layout, std::vector<double>(layout.total(), 0.0)};
}

CellParams init_params(const ModelConfig& config) {
  CellParams p = zeros(ParamLayout::for_config(config));
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden_size));
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  const bool lstm_cells =
      config.kind != ModelKind::rnn && config.kind != ModelKind::gru;
  for (const TensorInfo& t : p.layout.tensors()) {
    const bool bias = t.name.ends_with(".b");
    auto dst = std::span<double>(p.values).subspan(t.offset, t.size());
    if (!bias) {
      for (double& v : dst) v = dist(rng);
    } else if (lstm_cells && t.name != "out.b") {
      // Gate order is input, forget, cell, output.
      const std::size_t h = config.hidden_size;
      std::fill(dst.begin() + static_cast<std::ptrdiff_t>(h),
                dst.begin() + static_cast<std::ptrdiff_t>(2 * h), 1.0);
    }
  }
  return p;
}

}  // namespace trafficseq::neuralseq
