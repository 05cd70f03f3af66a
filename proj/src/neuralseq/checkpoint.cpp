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

// Text checkpoint: one "key value" line per config field, then every tensor
// with a "tensor <name> <rows> <cols>" header and one value per line. Reals
// are written as C99 hex floats so a reload is bit-exact.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "trafficseq/error.hpp"
#include "trafficseq/neuralseq/train.hpp"

namespace trafficseq::neuralseq {
namespace {

constexpr const char* kMagic = "trafficseq-checkpoint";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw Error("checkpoint", "truncated checkpoint");
    return w;
  }

  void expect(const std::string& key) {
    const std::string got = word();
    if (got != key) throw Error("checkpoint", "expected '" + key + "', found '" + got + "'");
  }

  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0') throw Error("checkpoint", "bad number '" + w + "'");
    return v;
  }

  unsigned long long integer() {
    const std::string w = word();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(w.c_str(), &end, 10);
    if (end == w.c_str() || *end != '\0') throw Error("checkpoint", "bad integer '" + w + "'");
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const TrainedModel& model, std::ostream& out) {
  const ModelConfig& c = model.config;
  out << kMagic << " v" << kVersion << '\n';
  out << "kind " << to_string(c.kind) << '\n';
  out << "window_w " << c.window_w << '\n';
  out << "hidden_size " << c.hidden_size << '\n';
  out << "epochs " << c.epochs << '\n';
  out << "batch_size " << c.batch_size << '\n';
  out << "learning_rate " << hex(c.learning_rate) << '\n';
  out << "seed " << c.seed << '\n';
  out << "grad_clip " << hex(c.grad_clip) << '\n';
  out << "scaler minmax " << hex(model.scaler.lo()) << ' ' << hex(model.scaler.hi()) << '\n';
  out << "loss_history " << model.train_loss_history.size() << '\n';
  for (double v : model.train_loss_history) out << hex(v) << '\n';
  out << "tensors " << model.params.layout.tensors().size() << '\n';
  for (const TensorInfo& t : model.params.layout.tensors()) {
    out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) out << hex(model.params.values[t.offset + i]) << '\n';
  }
  out << "end\n";
  if (!out) throw Error("checkpoint", "write failed");
}

TrainedModel load_checkpoint(std::istream& in) {
  Reader r(in);
  r.expect(kMagic);
  r.expect("v" + std::to_string(kVersion));
  ModelConfig c;
  r.expect("kind");
  c.kind = parse_model_kind(r.word());
  r.expect("window_w");
  c.window_w = r.integer();
  r.expect("hidden_size");
  c.hidden_size = r.integer();
  r.expect("epochs");
  c.epochs = static_cast<int>(r.integer());
  r.expect("batch_size");
  c.batch_size = r.integer();
  r.expect("learning_rate");
  c.learning_rate = r.real();
  r.expect("seed");
  c.seed = r.integer();
  r.expect("grad_clip");
  c.grad_clip = r.real();
  c.validate();

  r.expect("scaler");
  r.expect("minmax");
  const double lo = r.real();
  const double hi = r.real();
  TrainedModel model{c, zeros(ParamLayout::for_config(c)), {}, Scaler(lo, hi)};

  r.expect("loss_history");
  const auto n_loss = r.integer();
  model.train_loss_history.reserve(n_loss);
  for (unsigned long long i = 0; i < n_loss; ++i) model.train_loss_history.push_back(r.real());

  r.expect("tensors");
  const auto n_tensors = r.integer();
  if (n_tensors != model.params.layout.tensors().size()) {
    throw Error("checkpoint", "tensor count does not match the model kind");
  }
  for (const TensorInfo& t : model.params.layout.tensors()) {
    r.expect("tensor");
    const std::string name = r.word();
    const auto rows = r.integer();
    const auto cols = r.integer();
    if (name != t.name || rows != t.rows || cols != t.cols) {
      throw Error("checkpoint", "tensor '" + name + "' does not match the expected shape of '" +
                                    t.name + "'");
    }
    for (std::size_t i = 0; i < t.size(); ++i) model.params.values[t.offset + i] = r.real();
  }
  r.expect("end");
  if (!model.params.all_finite()) throw Error("checkpoint", "non-finite parameter");
  return model;
}

void save_checkpoint(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("checkpoint", "cannot open '" + path + "' for writing");
  save_checkpoint(model, out);
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("checkpoint", "cannot open '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace trafficseq::neuralseq
