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

#include "trafficseq/neuralseq/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trafficseq/error.hpp"
#include "trafficseq/simd/kernels.hpp"

namespace trafficseq::neuralseq {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool finite_sum(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i];
  return std::isfinite(s);
}

std::size_t gate_count(CellType type) {
  switch (type) {
    case CellType::rnn:
      return 1;
    case CellType::lstm:
      return 4;
    case CellType::gru:
      return 3;
  }
  return 1;
}

}  // namespace

RecurrentLayer::RecurrentLayer(CellType type, std::size_t hidden, std::size_t off_wx,
                               std::size_t off_wh, std::size_t off_b)
    : type_(type),
      hidden_(hidden),
      gates_(gate_count(type)),
      off_wx_(off_wx),
      off_wh_(off_wh),
      off_b_(off_b) {
  dpre_.resize(gate_rows());
  dh_.resize(hidden_);
  dc_.resize(hidden_);
  dh_prev_.resize(hidden_);
  drh_.resize(hidden_);
}

void RecurrentLayer::reserve(std::size_t steps) {
  steps_ = steps;
  const std::size_t h = hidden_;
  if (h_.size() < (steps + 1) * h) {
    h_.resize((steps + 1) * h);
    c_.resize((steps + 1) * h);
    tanh_c_.resize(steps * h);
    rh_.resize(steps * h);
    gates_buf_.resize(steps * gate_rows());
  }
}

bool RecurrentLayer::forward(const double* p, std::span<const double> x, const double* h0,
                             const double* c0, std::size_t* bad_step) {
  const auto& k = simd::active();
  const std::size_t hn = hidden_;
  const std::size_t gr = gate_rows();
  reserve(x.size());
  if (h0 != nullptr) {
    std::copy(h0, h0 + hn, h_.begin());
  } else {
    std::fill(h_.begin(), h_.begin() + static_cast<std::ptrdiff_t>(hn), 0.0);
  }
  if (c0 != nullptr) {
    std::copy(c0, c0 + hn, c_.begin());
  } else {
    std::fill(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(hn), 0.0);
  }

  const double* wx = p + off_wx_;
  const double* wh = p + off_wh_;
  const double* b = p + off_b_;
  for (std::size_t t = 0; t < x.size(); ++t) {
    double* a = gates_buf_.data() + t * gr;
    const double* hp = h_.data() + t * hn;
    double* hn_out = h_.data() + (t + 1) * hn;
    for (std::size_t r = 0; r < gr; ++r) a[r] = b[r] + wx[r] * x[t];

    switch (type_) {
      case CellType::rnn:
        k.gemv(wh, hn, hn, hp, a);
        for (std::size_t j = 0; j < hn; ++j) {
          a[j] = std::tanh(a[j]);
          hn_out[j] = a[j];
        }
        break;
      case CellType::lstm: {
        k.gemv(wh, gr, hn, hp, a);
        const double* cp = c_.data() + t * hn;
        double* cn = c_.data() + (t + 1) * hn;
        double* tc = tanh_c_.data() + t * hn;
        for (std::size_t j = 0; j < hn; ++j) {
          const double i = sigmoid(a[j]);
          const double f = sigmoid(a[hn + j]);
          const double g = std::tanh(a[2 * hn + j]);
          const double o = sigmoid(a[3 * hn + j]);
          a[j] = i;
          a[hn + j] = f;
          a[2 * hn + j] = g;
          a[3 * hn + j] = o;
          cn[j] = f * cp[j] + i * g;
          tc[j] = std::tanh(cn[j]);
          hn_out[j] = o * tc[j];
        }
        break;
      }
      case CellType::gru: {
        k.gemv(wh, 2 * hn, hn, hp, a);
        double* rh = rh_.data() + t * hn;
        for (std::size_t j = 0; j < hn; ++j) {
          a[j] = sigmoid(a[j]);
          a[hn + j] = sigmoid(a[hn + j]);
          rh[j] = a[hn + j] * hp[j];
        }
        k.gemv(wh + 2 * hn * hn, hn, hn, rh, a + 2 * hn);
        for (std::size_t j = 0; j < hn; ++j) {
          const double z = a[j];
          const double n = std::tanh(a[2 * hn + j]);
          a[2 * hn + j] = n;
          hn_out[j] = z * n + (1.0 - z) * hp[j];
        }
        break;
      }
    }
    if (!finite_sum(hn_out, hn)) {
      if (bad_step != nullptr) *bad_step = t + 1;
      return false;
    }
  }
  return true;
}

void RecurrentLayer::backward(const double* p, double* grad, std::span<const double> x,
                              std::span<const double> dh_inject, const double* dh_last,
                              const double* dc_last, double* dh0, double* dc0) {
  const auto& k = simd::active();
  const std::size_t hn = hidden_;
  const std::size_t gr = gate_rows();
  const double* wh = p + off_wh_;
  double* g_wx = grad + off_wx_;
  double* g_wh = grad + off_wh_;
  double* g_b = grad + off_b_;

  if (dh_last != nullptr) {
    std::copy(dh_last, dh_last + hn, dh_.begin());
  } else {
    std::fill(dh_.begin(), dh_.end(), 0.0);
  }
  if (dc_last != nullptr) {
    std::copy(dc_last, dc_last + hn, dc_.begin());
  } else {
    std::fill(dc_.begin(), dc_.end(), 0.0);
  }

  double* dpre = dpre_.data();
  for (std::size_t t = steps_; t-- > 0;) {
    if (!dh_inject.empty()) k.axpy(1.0, dh_inject.data() + t * hn, dh_.data(), hn);
    const double* a = gates_buf_.data() + t * gr;
    const double* hp = h_.data() + t * hn;
    std::fill(dh_prev_.begin(), dh_prev_.end(), 0.0);

    switch (type_) {
      case CellType::rnn: {
        const double* hcur = h_.data() + (t + 1) * hn;
        for (std::size_t j = 0; j < hn; ++j) dpre[j] = dh_[j] * (1.0 - hcur[j] * hcur[j]);
        k.gemv_t(wh, hn, hn, dpre, dh_prev_.data());
        k.ger(1.0, dpre, hn, hp, hn, g_wh);
        break;
      }
      case CellType::lstm: {
        const double* cp = c_.data() + t * hn;
        const double* tc = tanh_c_.data() + t * hn;
        for (std::size_t j = 0; j < hn; ++j) {
          const double i = a[j], f = a[hn + j], g = a[2 * hn + j], o = a[3 * hn + j];
          const double dc = dc_[j] + dh_[j] * o * (1.0 - tc[j] * tc[j]);
          dpre[j] = dc * g * i * (1.0 - i);
          dpre[hn + j] = dc * cp[j] * f * (1.0 - f);
          dpre[2 * hn + j] = dc * i * (1.0 - g * g);
          dpre[3 * hn + j] = dh_[j] * tc[j] * o * (1.0 - o);
          dc_[j] = dc * f;
        }
        k.gemv_t(wh, gr, hn, dpre, dh_prev_.data());
        k.ger(1.0, dpre, gr, hp, hn, g_wh);
        break;
      }
      case CellType::gru: {
        const double* rh = rh_.data() + t * hn;
        for (std::size_t j = 0; j < hn; ++j) {
          const double z = a[j], n = a[2 * hn + j];
          dpre[2 * hn + j] = dh_[j] * z * (1.0 - n * n);
          dpre[j] = dh_[j] * (n - hp[j]) * z * (1.0 - z);
          dh_prev_[j] = dh_[j] * (1.0 - z);
        }
        const double* wh_n = wh + 2 * hn * hn;
        std::fill(drh_.begin(), drh_.end(), 0.0);
        k.gemv_t(wh_n, hn, hn, dpre + 2 * hn, drh_.data());
        k.ger(1.0, dpre + 2 * hn, hn, rh, hn, g_wh + 2 * hn * hn);
        for (std::size_t j = 0; j < hn; ++j) {
          const double r = a[hn + j];
          dpre[hn + j] = drh_[j] * hp[j] * r * (1.0 - r);
          dh_prev_[j] += drh_[j] * r;
        }
        k.gemv_t(wh, 2 * hn, hn, dpre, dh_prev_.data());
        k.ger(1.0, dpre, 2 * hn, hp, hn, g_wh);
        break;
      }
    }
    k.axpy(x[t], dpre, g_wx, gr);
    k.axpy(1.0, dpre, g_b, gr);
    std::swap(dh_, dh_prev_);
  }
  if (dh0 != nullptr) std::copy(dh_.begin(), dh_.end(), dh0);
  if (dc0 != nullptr) std::copy(dc_.begin(), dc_.end(), dc0);
}

SequenceModel::SequenceModel(const ModelConfig& config)
    : config_(config), layout_(ParamLayout::for_config(config)), h_(config.hidden_size) {
  auto layer = [&](CellType type, const std::string& prefix) {
    return RecurrentLayer(type, h_, layout_.find(prefix + ".W_x").offset,
                          layout_.find(prefix + ".W_h").offset, layout_.find(prefix + ".b").offset);
  };
  switch (config.kind) {
    case ModelKind::rnn:
      enc_ = layer(CellType::rnn, "rnn");
      break;
    case ModelKind::lstm:
      enc_ = layer(CellType::lstm, "lstm");
      break;
    case ModelKind::gru:
      enc_ = layer(CellType::gru, "gru");
      break;
    case ModelKind::lstm_en_de_atn:
      has_attention_ = true;
      off_w_enc_ = layout_.find("attn.W_enc").offset;
      off_w_dec_ = layout_.find("attn.W_dec").offset;
      off_v_ = layout_.find("attn.v").offset;
      [[fallthrough]];
    case ModelKind::lstm_en_de:
      has_decoder_ = true;
      enc_ = layer(CellType::lstm, "enc");
      dec_ = layer(CellType::lstm, "dec");
      break;
  }
  off_out_w_ = layout_.find("out.W").offset;
  off_out_b_ = layout_.find("out.b").offset;

  const std::size_t w = config.window_w;
  if (has_attention_) {
    u_.resize(w * h_);
    alpha_.resize(w);
    ctx_.resize(h_);
    d_.resize(h_);
    dctx_.resize(h_);
    dpre_.resize(h_);
    sum_dpre_.resize(h_);
    inject_.resize(w * h_);
  }
  ds_.resize(h_);
  dh0_.resize(h_);
  dc0_.resize(h_);
}

std::span<const double> SequenceModel::head_state() const noexcept {
  const double* s = has_decoder_ ? dec_.h(1) : enc_.h(config_.window_w);
  return {s, h_};
}

double SequenceModel::forward(const CellParams& params, std::span<const double> x) {
  if (x.size() != config_.window_w) {
    throw Error("neuralseq", "input has " + std::to_string(x.size()) + " steps, model expects " +
                                 std::to_string(config_.window_w));
  }
  if (params.values.size() != layout_.total()) {
    throw Error("neuralseq", "parameter vector does not match the model layout");
  }
  const auto& k = simd::active();
  const double* p = params.values.data();
  const std::size_t w = x.size();

  std::size_t bad = 0;
  if (!enc_.forward(p, x, nullptr, nullptr, &bad)) {
    throw Error("neuralseq", "non-finite hidden state at time step " + std::to_string(bad));
  }
  if (has_decoder_ && !dec_.forward(p, x.last(1), enc_.h(w), enc_.c(w), &bad)) {
    throw Error("neuralseq", "non-finite decoder state at time step " + std::to_string(w + 1));
  }
  const double* s = head_state().data();
  const double* out_w = p + off_out_w_;
  double y = p[off_out_b_] + k.dot(out_w, s, h_);

  if (has_attention_) {
    std::fill(d_.begin(), d_.end(), 0.0);
    k.gemv(p + off_w_dec_, h_, h_, s, d_.data());
    double max_score = -INFINITY;
    for (std::size_t j = 0; j < w; ++j) {
      double* u = u_.data() + j * h_;
      std::copy(d_.begin(), d_.end(), u);
      k.gemv(p + off_w_enc_, h_, h_, enc_.h(j + 1), u);
      for (std::size_t i = 0; i < h_; ++i) u[i] = std::tanh(u[i]);
      alpha_[j] = k.dot(p + off_v_, u, h_);
      max_score = std::max(max_score, alpha_[j]);
    }
    double z = 0.0;
    for (double& a : alpha_) {
      a = std::exp(a - max_score);
      z += a;
    }
    std::fill(ctx_.begin(), ctx_.end(), 0.0);
    for (std::size_t j = 0; j < w; ++j) {
      alpha_[j] /= z;
      k.axpy(alpha_[j], enc_.h(j + 1), ctx_.data(), h_);
    }
    y += k.dot(out_w + h_, ctx_.data(), h_);
  }
  if (!std::isfinite(y)) {
    throw Error("neuralseq", "non-finite output at time step " + std::to_string(w));
  }
  return y;
}

void SequenceModel::backward(const CellParams& params, std::span<const double> x, double dy,
                             CellParams& grad) {
  const auto& k = simd::active();
  const double* p = params.values.data();
  double* g = grad.values.data();
  const std::size_t w = x.size();
  const double* s = head_state().data();
  const double* out_w = p + off_out_w_;

  g[off_out_b_] += dy;
  k.axpy(dy, s, g + off_out_w_, h_);
  for (std::size_t i = 0; i < h_; ++i) ds_[i] = dy * out_w[i];

  if (has_attention_) {
    k.axpy(dy, ctx_.data(), g + off_out_w_ + h_, h_);
    for (std::size_t i = 0; i < h_; ++i) dctx_[i] = dy * out_w[h_ + i];
    double mean_dalpha = 0.0;
    for (std::size_t j = 0; j < w; ++j) {
      mean_dalpha += alpha_[j] * k.dot(dctx_.data(), enc_.h(j + 1), h_);
    }
    std::fill(inject_.begin(), inject_.end(), 0.0);
    std::fill(sum_dpre_.begin(), sum_dpre_.end(), 0.0);
    const double* v = p + off_v_;
    for (std::size_t j = 0; j < w; ++j) {
      const double* hj = enc_.h(j + 1);
      const double* u = u_.data() + j * h_;
      double* inj = inject_.data() + j * h_;
      const double dscore = alpha_[j] * (k.dot(dctx_.data(), hj, h_) - mean_dalpha);
      k.axpy(alpha_[j], dctx_.data(), inj, h_);
      k.axpy(dscore, u, g + off_v_, h_);
      for (std::size_t i = 0; i < h_; ++i) dpre_[i] = dscore * v[i] * (1.0 - u[i] * u[i]);
      k.ger(1.0, dpre_.data(), h_, hj, h_, g + off_w_enc_);
      k.gemv_t(p + off_w_enc_, h_, h_, dpre_.data(), inj);
      k.axpy(1.0, dpre_.data(), sum_dpre_.data(), h_);
    }
    k.ger(1.0, sum_dpre_.data(), h_, s, h_, g + off_w_dec_);
    k.gemv_t(p + off_w_dec_, h_, h_, sum_dpre_.data(), ds_.data());
  }

  if (has_decoder_) {
    dec_.backward(p, g, x.last(1), {}, ds_.data(), nullptr, dh0_.data(), dc0_.data());
    enc_.backward(p, g, x, has_attention_ ? std::span<const double>(inject_) : std::span<const double>{},
                  dh0_.data(), dc0_.data(), nullptr, nullptr);
  } else {
    enc_.backward(p, g, x, {}, ds_.data(), nullptr, nullptr, nullptr);
  }
}

LossAndGradients loss_and_gradients(const CellParams& params, const ModelConfig& config,
                                    std::span<const double> features,
                                    std::span<const double> targets) {
  const std::size_t n = targets.size();
  const std::size_t w = config.window_w;
  if (n == 0) throw Error("neuralseq", "empty batch");
  if (features.size() != n * w) throw Error("neuralseq", "feature matrix shape mismatch");

  SequenceModel model(config);
  LossAndGradients out{0.0, zeros(model.layout())};
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = features.subspan(i * w, w);
    const double err = model.forward(params, x) - targets[i];
    out.loss += err * err;
    model.backward(params, x, 2.0 * err / static_cast<double>(n), out.gradients);
  }
  out.loss /= static_cast<double>(n);
  if (!std::isfinite(out.loss)) throw Error("neuralseq", "non-finite loss");
  return out;
}

}  // namespace trafficseq::neuralseq
