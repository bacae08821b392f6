// Copyright 2026 The t2a-score Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "t2a/ahq.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "t2a/error.hpp"
#include "t2a/rng.hpp"
#include "t2a/text_util.hpp"

namespace t2a {
namespace {

constexpr std::size_t kC = kAhqClasses;

AhqParams zeros_like(const AhqModel& m) {
  return {std::vector<double>(m.w1.size(), 0.0), std::vector<double>(m.b1.size(), 0.0),
          std::vector<double>(m.w2.size(), 0.0), std::vector<double>(m.b2.size(), 0.0)};
}

void check_dim(const AhqModel& model, std::size_t dim) {
  if (dim != model.d) {
    throw std::invalid_argument("AHQ model expects dimension " + std::to_string(model.d) + ", got " +
                                std::to_string(dim));
  }
}

// Hidden activations (post-ReLU) and logits for one input.
void forward(const AhqModel& m, std::span<const float> x, std::vector<double>& hidden, std::vector<double>& logits) {
  hidden.assign(m.b1.begin(), m.b1.end());
  for (std::size_t i = 0; i < m.d; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = &m.w1[i * m.h];
    for (std::size_t k = 0; k < m.h; ++k) hidden[k] += xi * row[k];
  }
  for (double& a : hidden) a = std::max(0.0, a);
  logits.assign(m.b2.begin(), m.b2.end());
  for (std::size_t k = 0; k < m.h; ++k) {
    const double* row = &m.w2[k * kC];
    for (std::size_t c = 0; c < kC; ++c) logits[c] += hidden[k] * row[c];
  }
}

void adam_step(std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& m,
               std::vector<double>& v, const AhqTrainOptions& o, double correction1, double correction2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * grad[i];
    v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    param[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

void put_floats(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.emplace_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

int parse_label(const std::string& cell, std::size_t line_no) {
  int value = 0;
  std::size_t used = 0;
  try {
    value = std::stoi(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != cell.size() || cell.empty() || value < 1 || value > kAhqClasses) {
    throw InputError("line " + std::to_string(line_no) + ": label '" + cell + "' is not an integer in 1..4");
  }
  return value;
}

}  // namespace

AhqModel AhqModel::zeros(std::size_t d, std::size_t h) {
  AhqModel m;
  m.d = d;
  m.h = h;
  m.w1.assign(d * h, 0.0);
  m.b1.assign(h, 0.0);
  m.w2.assign(h * kC, 0.0);
  m.b2.assign(kC, 0.0);
  return m;
}

bool AhqModel::finite() const {
  const auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(w1) && ok(b1) && ok(w2) && ok(b2);
}

std::vector<double> ahq_logits(const AhqModel& model, std::span<const float> x) {
  check_dim(model, x.size());
  std::vector<double> hidden, logits;
  forward(model, x, hidden, logits);
  return logits;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) total += p[c] = std::exp(logits[c] - peak);
  for (double& v : p) v /= total;
  return p;
}

double ahq_predict(const AhqModel& model, const EmbeddingVector& embedding) {
  const auto p = softmax(ahq_logits(model, embedding.values));
  double expected = 0.0;
  for (std::size_t c = 0; c < kC; ++c) expected += static_cast<double>(c + 1) * p[c];
  return std::clamp(expected, 1.0, 4.0);
}

int ahq_classify(const AhqModel& model, const EmbeddingVector& embedding) {
  const auto logits = ahq_logits(model, embedding.values);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin()) + 1;
}

double ahq_loss(const AhqModel& m, std::span<const AhqExample> examples, std::span<const std::size_t> indices,
                AhqParams* grad) {
  if (indices.empty()) throw std::invalid_argument("ahq_loss needs a non-empty batch");
  if (grad != nullptr) *grad = zeros_like(m);
  const double scale = 1.0 / static_cast<double>(indices.size());
  std::vector<double> hidden, logits, dlogits(kC), dhidden(m.h);
  double loss = 0.0;

  for (std::size_t idx : indices) {
    const auto& ex = examples[idx];
    check_dim(m, ex.embedding.dim());
    const std::span<const float> x = ex.embedding.values;
    forward(m, x, hidden, logits);
    const auto p = softmax(logits);
    const std::size_t target = static_cast<std::size_t>(ex.label - 1);
    loss -= std::log(std::max(p[target], 1e-300)) * scale;
    if (grad == nullptr) continue;

    for (std::size_t c = 0; c < kC; ++c) dlogits[c] = (p[c] - (c == target ? 1.0 : 0.0)) * scale;
    for (std::size_t c = 0; c < kC; ++c) grad->b2[c] += dlogits[c];
    for (std::size_t k = 0; k < m.h; ++k) {
      double acc = 0.0;
      for (std::size_t c = 0; c < kC; ++c) {
        grad->w2[k * kC + c] += hidden[k] * dlogits[c];
        acc += m.w2[k * kC + c] * dlogits[c];
      }
      dhidden[k] = hidden[k] > 0.0 ? acc : 0.0;
      grad->b1[k] += dhidden[k];
    }
    for (std::size_t i = 0; i < m.d; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      double* row = &grad->w1[i * m.h];
      for (std::size_t k = 0; k < m.h; ++k) row[k] += xi * dhidden[k];
    }
  }
  return loss;
}

double ahq_accuracy(const AhqModel& model, std::span<const AhqExample> examples) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : examples) correct += ahq_classify(model, ex.embedding) == ex.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

AhqTrainResult ahq_train(std::span<const AhqExample> examples, const AhqTrainOptions& options) {
  if (examples.empty()) throw InputError("AHQ training set is empty");
  if (options.epochs < 1 || options.batch == 0 || options.hidden == 0 || !(options.lr > 0.0)) {
    throw std::invalid_argument("AHQ training needs epochs >= 1, batch >= 1, hidden >= 1 and lr > 0");
  }
  const std::size_t d = examples.front().embedding.dim();
  std::set<int> classes;
  for (const auto& ex : examples) {
    if (ex.embedding.dim() != d) throw InputError("AHQ training embeddings have inconsistent dimensions");
    if (ex.label < 1 || ex.label > kAhqClasses) throw InputError("AHQ label outside 1..4");
    classes.insert(ex.label);
  }
  if (d == 0) throw InputError("AHQ training embeddings are empty");
  if (classes.size() < 2) throw InputError("AHQ training data holds a single class");

  Rng rng(options.seed);
  AhqModel model = AhqModel::zeros(d, options.hidden);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(options.hidden));
  for (double& w : model.w1) w = uniform_real(rng, -r1, r1);
  for (double& w : model.w2) w = uniform_real(rng, -r2, r2);

  AhqParams m1 = zeros_like(model), m2 = zeros_like(model), grad;
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  AhqTrainResult result;
  long step = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle(std::span(order), rng);
    double epoch_loss = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch, ++batch_no) {
      const auto batch = std::span(order).subspan(begin, std::min(options.batch, order.size() - begin));
      const double loss = ahq_loss(model, examples, batch, &grad);
      if (!std::isfinite(loss)) {
        throw Error("AHQ loss became non-finite at epoch " + std::to_string(epoch + 1) + ", batch " +
                    std::to_string(batch_no + 1));
      }
      epoch_loss += loss * static_cast<double>(batch.size());
      ++step;
      const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
      adam_step(model.w1, grad.w1, m1.w1, m2.w1, options, c1, c2);
      adam_step(model.b1, grad.b1, m1.b1, m2.b1, options, c1, c2);
      adam_step(model.w2, grad.w2, m1.w2, m2.w2, options, c1, c2);
      adam_step(model.b2, grad.b2, m1.b2, m2.b2, options, c1, c2);
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  if (!model.finite()) throw Error("AHQ training produced non-finite parameters");
  result.train_accuracy = ahq_accuracy(model, examples);
  result.model = std::move(model);
  return result;
}

void save_ahq_model(const std::filesystem::path& path, const AhqModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write AHQ model " + path.string());
  out.write("AHQ1", 4);
  put_u32(out, static_cast<std::uint32_t>(model.d));
  put_u32(out, static_cast<std::uint32_t>(model.h));
  put_floats(out, model.w1);
  put_floats(out, model.b1);
  put_floats(out, model.w2);
  put_floats(out, model.b2);
  if (!out) throw Error("write error on AHQ model " + path.string());
}

AhqModel load_ahq_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open AHQ model " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto u32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
    return v;
  };
  if (bytes.size() < 12 || bytes.compare(0, 4, "AHQ1") != 0) {
    throw InputError(path.string() + " is not an AHQ1 model file");
  }
  AhqModel model = AhqModel::zeros(u32(4), u32(8));
  const std::size_t floats = model.w1.size() + model.b1.size() + model.w2.size() + model.b2.size();
  if (bytes.size() != 12 + 4 * floats) throw InputError(path.string() + ": AHQ1 payload size mismatch");
  std::size_t at = 12;
  for (auto* part : {&model.w1, &model.b1, &model.w2, &model.b2}) {
    for (double& v : *part) {
      v = std::bit_cast<float>(u32(at));
      at += 4;
    }
  }
  if (!model.finite()) throw InputError(path.string() + ": AHQ model holds non-finite parameters");
  return model;
}

AhqLabels parse_ahq_labels(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("AHQ label file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const bool single = header == std::vector<std::string>{"audio_id", "label"};
  const bool triple = header == std::vector<std::string>{"audio_id", "a1", "a2", "a3"};
  if (!single && !triple) {
    throw InputError("AHQ label header must be 'audio_id,label' or 'audio_id,a1,a2,a3', got '" + line + "'");
  }

  AhqLabels out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size() || cells[0].empty()) {
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " non-empty columns");
    }
    if (single) {
      out.labels.emplace_back(cells[0], parse_label(cells[1], line_no));
      continue;
    }
    const int a = parse_label(cells[1], line_no), b = parse_label(cells[2], line_no),
              c = parse_label(cells[3], line_no);
    if (a == b || a == c) {
      out.labels.emplace_back(cells[0], a);
    } else if (b == c) {
      out.labels.emplace_back(cells[0], b);
    } else {
      out.dropped.push_back(cells[0]);
    }
  }
  return out;
}

AhqLabels load_ahq_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open AHQ label file " + path.string());
  return parse_ahq_labels(in);
}

}  // namespace t2a
