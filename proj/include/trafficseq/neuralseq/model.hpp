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

// Forward pass and exact backpropagation through time for the five sequence
// models. A SequenceModel owns the scratch buffers for one sample at a time,
// so it is cheap to reuse but must not be shared between threads.
//
// Recurrences (sigma = logistic, * = elementwise):
//   rnn   h_t = tanh(W_x x_t + W_h h_{t-1} + b)
//   lstm  [i f g o] = [sigma sigma tanh sigma](W_x x_t + W_h h_{t-1} + b)
//         c_t = f * c_{t-1} + i * g,  h_t = o * tanh(c_t)
//   gru   z = sigma(.), r = sigma(.),  n = tanh(W_xn x_t + W_hn (r * h_{t-1}) + b_n)
//         h_t = z * n + (1 - z) * h_{t-1}
// Encoder-decoder: an LSTM encoder reads the window; one decoder LSTM step,
// fed the last input value and started from the encoder's final (h, c),
// produces s. With attention, score_j = v . tanh(W_enc h_j + W_dec s),
// alpha = softmax(score), ctx = sum_j alpha_j h_j and the head reads [s; ctx].

#include <cstddef>
#include <span>
#include <vector>

#include "trafficseq/neuralseq/config.hpp"
#include "trafficseq/neuralseq/params.hpp"

namespace trafficseq::neuralseq {

enum class CellType { rnn, lstm, gru };

// One recurrent layer over a scalar input sequence.
class RecurrentLayer {
 public:
  RecurrentLayer() = default;
  RecurrentLayer(CellType type, std::size_t hidden, std::size_t off_wx, std::size_t off_wh,
                 std::size_t off_b);

  CellType type() const noexcept { return type_; }
  std::size_t gate_rows() const noexcept { return gates_ * hidden_; }

  // h0/c0 may be null for a zero initial state. Returns false on a non-finite
  // hidden state, with the failing step in *bad_step.
  bool forward(const double* params, std::span<const double> x, const double* h0,
               const double* c0, std::size_t* bad_step);

  // dh_inject: steps x hidden, added to dL/dh_t (may be empty).
  // dh_last/dc_last: gradient reaching the final state (dc ignored for rnn/gru).
  // On return dh0/dc0 hold the gradient w.r.t. the initial state.
  void backward(const double* params, double* grad, std::span<const double> x,
                std::span<const double> dh_inject, const double* dh_last, const double* dc_last,
                double* dh0, double* dc0);

  // State after step t (1-based); t = 0 is the initial state.
  const double* h(std::size_t t) const { return h_.data() + t * hidden_; }
  const double* c(std::size_t t) const { return c_.data() + t * hidden_; }
  const double* gates(std::size_t t) const { return gates_buf_.data() + t * gate_rows(); }

 private:
  void reserve(std::size_t steps);

  CellType type_ = CellType::rnn;
  std::size_t hidden_ = 0;
  std::size_t gates_ = 1;
  std::size_t off_wx_ = 0, off_wh_ = 0, off_b_ = 0;
  std::size_t steps_ = 0;

  std::vector<double> h_, c_, tanh_c_, gates_buf_, rh_;
  std::vector<double> dpre_, dh_, dc_, dh_prev_, drh_;
};

class SequenceModel {
 public:
  explicit SequenceModel(const ModelConfig& config);

  const ModelConfig& config() const noexcept { return config_; }
  const ParamLayout& layout() const noexcept { return layout_; }

  // Scalar prediction in scaled space. Throws on a non-finite intermediate.
  double forward(const CellParams& params, std::span<const double> x);

  // Adds dy * d(prediction)/d(params) to grad. Must follow forward() on the
  // same params and input.
  void backward(const CellParams& params, std::span<const double> x, double dy,
                CellParams& grad);

  // Attention weights of the last forward (empty for non-attention kinds).
  std::span<const double> attention_weights() const noexcept { return alpha_; }
  // Final hidden state fed to the head (decoder state for encoder-decoders).
  std::span<const double> head_state() const noexcept;
  const RecurrentLayer& encoder() const noexcept { return enc_; }

 private:
  ModelConfig config_;
  ParamLayout layout_;
  std::size_t h_ = 0;
  RecurrentLayer enc_;
  RecurrentLayer dec_;
  bool has_decoder_ = false;
  bool has_attention_ = false;
  std::size_t off_out_w_ = 0, off_out_b_ = 0;
  std::size_t off_w_enc_ = 0, off_w_dec_ = 0, off_v_ = 0;

  // attention scratch
  std::vector<double> e_, u_, alpha_, ctx_, d_;
  std::vector<double> ds_, dctx_, dpre_, sum_dpre_, inject_, dh0_, dc0_, zero_;
};

struct LossAndGradients {
  double loss = 0.0;
  CellParams gradients;
};

// Mean squared error over rows [begin, end) of a scaled dataset and its exact
// gradient.
LossAndGradients loss_and_gradients(const CellParams& params, const ModelConfig& config,
                                    std::span<const double> features,
                                    std::span<const double> targets);

}  // namespace trafficseq::neuralseq
