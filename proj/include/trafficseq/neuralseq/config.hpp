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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace trafficseq::neuralseq {

enum class ModelKind { rnn, lstm, gru, lstm_en_de, lstm_en_de_atn };

inline constexpr std::array<ModelKind, 5> kAllModelKinds{
    ModelKind::rnn, ModelKind::lstm, ModelKind::gru, ModelKind::lstm_en_de,
    ModelKind::lstm_en_de_atn};

// CLI spelling: rnn, lstm, gru, lstm-ed, lstm-ed-attn.
std::string_view to_string(ModelKind kind) noexcept;
// Table spelling: RNN, LSTM, GRU, LSTM En_De, LSTM En_De_Atn.
std::string_view display_name(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view text);

struct ModelConfig {
  ModelKind kind = ModelKind::lstm;
  std::size_t window_w = 6;
  std::size_t hidden_size = 32;
  int epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double grad_clip = 1.0;

  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace trafficseq::neuralseq
