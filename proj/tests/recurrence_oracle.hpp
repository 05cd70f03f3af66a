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

// Independent forward oracle for the sequence models: every recurrence is
// written out as nested scalar loops indexed directly into the named tensors.

#include <cmath>
#include <vector>

#include "trafficseq/neuralseq/params.hpp"

namespace test_oracle {

using trafficseq::neuralseq::CellParams;
using trafficseq::neuralseq::ModelKind;

struct State {
  std::vector<double> h, c;
};

inline double sig(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Pre-activation row r of a cell: b[r] + Wx[r] x + sum_k Wh[r][k] v[k].
inline double pre(const CellParams& p, const std::string& cell, std::size_t r, double x,
                  const std::vector<double>& v) {
  const auto wx = p.tensor(cell + ".W_x");
  const auto wh = p.tensor(cell + ".W_h");
  const auto b = p.tensor(cell + ".b");
  const std::size_t h = v.size();
  double acc = b[r] + wx[r] * x;
  for (std::size_t k = 0; k < h; ++k) acc += wh[r * h + k] * v[k];
  return acc;
}

inline State lstm_step(const CellParams& p, const std::string& cell, double x, const State& s) {
  const std::size_t h = s.h.size();
  State n{std::vector<double>(h), std::vector<double>(h)};
  for (std::size_t j = 0; j < h; ++j) {
    const double i = sig(pre(p, cell, j, x, s.h));
    const double f = sig(pre(p, cell, h + j, x, s.h));
    const double g = std::tanh(pre(p, cell, 2 * h + j, x, s.h));
    const double o = sig(pre(p, cell, 3 * h + j, x, s.h));
    n.c[j] = f * s.c[j] + i * g;
    n.h[j] = o * std::tanh(n.c[j]);
  }
  return n;
}

inline State rnn_step(const CellParams& p, double x, const State& s) {
  State n{std::vector<double>(s.h.size()), {}};
  for (std::size_t j = 0; j < s.h.size(); ++j) n.h[j] = std::tanh(pre(p, "rnn", j, x, s.h));
  return n;
}

// Gate rows: update z, reset r, candidate n.
inline State gru_step(const CellParams& p, double x, const State& s) {
  const std::size_t h = s.h.size();
  std::vector<double> z(h), rh(h);
  for (std::size_t j = 0; j < h; ++j) {
    z[j] = sig(pre(p, "gru", j, x, s.h));
    rh[j] = sig(pre(p, "gru", h + j, x, s.h)) * s.h[j];
  }
  const auto wx = p.tensor("gru.W_x");
  const auto wh = p.tensor("gru.W_h");
  const auto b = p.tensor("gru.b");
  State n{std::vector<double>(h), {}};
  for (std::size_t j = 0; j < h; ++j) {
    const std::size_t r = 2 * h + j;
    double a = b[r] + wx[r] * x;
    for (std::size_t k = 0; k < h; ++k) a += wh[r * h + k] * rh[k];
    n.h[j] = z[j] * std::tanh(a) + (1.0 - z[j]) * s.h[j];
  }
  return n;
}

struct Forward {
  double y = 0.0;
  std::vector<std::vector<double>> enc_h;  // h_1..h_w
  std::vector<double> alpha;
};

inline Forward forward(const CellParams& p, ModelKind kind, std::size_t hidden,
                       const std::vector<double>& x) {
  Forward out;
  State s{std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)};
  const std::string enc = kind == ModelKind::lstm ? "lstm" : "enc";
  for (double xt : x) {
    switch (kind) {
      case ModelKind::rnn:
        s = rnn_step(p, xt, s);
        break;
      case ModelKind::gru:
        s = gru_step(p, xt, s);
        break;
      default:
        s = lstm_step(p, enc, xt, s);
    }
    out.enc_h.push_back(s.h);
  }
  if (kind == ModelKind::lstm_en_de || kind == ModelKind::lstm_en_de_atn) {
    s = lstm_step(p, "dec", x.back(), s);
  }
  const auto w_out = p.tensor("out.W");
  double y = p.tensor("out.b")[0];
  for (std::size_t j = 0; j < hidden; ++j) y += w_out[j] * s.h[j];

  if (kind == ModelKind::lstm_en_de_atn) {
    const auto we = p.tensor("attn.W_enc");
    const auto wd = p.tensor("attn.W_dec");
    const auto v = p.tensor("attn.v");
    std::vector<double> score(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
      double sc = 0.0;
      for (std::size_t i = 0; i < hidden; ++i) {
        double a = 0.0;
        for (std::size_t k = 0; k < hidden; ++k) {
          a += we[i * hidden + k] * out.enc_h[t][k] + wd[i * hidden + k] * s.h[k];
        }
        sc += v[i] * std::tanh(a);
      }
      score[t] = sc;
    }
    double z = 0.0;
    for (double sc : score) z += std::exp(sc);
    for (double sc : score) out.alpha.push_back(std::exp(sc) / z);
    for (std::size_t k = 0; k < hidden; ++k) {
      double ctx = 0.0;
      for (std::size_t t = 0; t < x.size(); ++t) ctx += out.alpha[t] * out.enc_h[t][k];
      y += w_out[hidden + k] * ctx;
    }
  }
  out.y = y;
  return out;
}

}  // namespace test_oracle
