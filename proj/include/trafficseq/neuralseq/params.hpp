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

#pragma once

// Flat parameter storage. Every model keeps all weights in one contiguous
// vector; a ParamLayout names the tensors inside it. Gradients and optimizer
// moments reuse the same layout.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trafficseq/neuralseq/config.hpp"

namespace trafficseq::neuralseq {

struct TensorInfo {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const noexcept { return rows * cols; }
  bool operator==(const TensorInfo&) const = default;
};

class ParamLayout {
 public:
  static ParamLayout for_config(const ModelConfig& config);

  std::span<const TensorInfo> tensors() const noexcept { return tensors_; }
  const TensorInfo& find(std::string_view name) const;
  bool contains(std::string_view name) const noexcept;
  std::size_t total() const noexcept { return total_; }

  bool operator==(const ParamLayout&) const = default;

 private:
  void add(std::string name, std::size_t rows, std::size_t cols);

  std::vector<TensorInfo> tensors_;
  std::size_t total_ = 0;
};

struct CellParams {
  ParamLayout layout;
  std::vector<double> values;

  std::span<double> tensor(std::string_view name);
  std::span<const double> tensor(std::string_view name) const;
  bool all_finite() const noexcept;

  bool operator==(const CellParams&) const = default;
};

CellParams zeros(const ParamLayout& layout);

// Weights uniform in [-1/sqrt(hidden), 1/sqrt(hidden)]; biases zero except
// the LSTM forget-gate slice, which starts at 1.
CellParams init_params(const ModelConfig& config);

}  // namespace trafficseq::neuralseq
