// Copyright 2026 The PointMask Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "train/checkpoint.hpp"

#include <map>
#include <string>
#include <variant>

#include "json.hpp"

#include "core/binary_io.hpp"
#include "core/errors.hpp"

namespace pointmask::train {
namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kTensorBlock = 0;
constexpr std::uint8_t kTextBlock = 1;
constexpr std::size_t kLogColumns = 6;

using Block = std::variant<Tensor, std::string>;

void put_tensor(ByteWriter& w, const std::string& name, const Tensor& t) {
  w.str(name);
  w.u8(kTensorBlock);
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
  for (double v : t.values()) w.f64(v);
}

void put_text(ByteWriter& w, const std::string& name, const std::string& text) {
  w.str(name);
  w.u8(kTextBlock);
  w.str(text);
}

const Block& need(const std::map<std::string, Block>& blocks, const std::string& name) {
  auto it = blocks.find(name);
  if (it == blocks.end()) throw FormatError("checkpoint lacks block '" + name + "'");
  return it->second;
}

const std::string& need_text(const std::map<std::string, Block>& blocks, const std::string& name) {
  const auto* s = std::get_if<std::string>(&need(blocks, name));
  if (!s) throw FormatError("checkpoint block '" + name + "' is not text");
  return *s;
}

void fill(const std::map<std::string, Block>& blocks, const std::string& name, Tensor& out) {
  const auto* t = std::get_if<Tensor>(&need(blocks, name));
  if (!t) throw FormatError("checkpoint block '" + name + "' is not a tensor");
  if (t->shape() != out.shape()) {
    throw FormatError("checkpoint block '" + name + "' has shape " + ad::shape_string(t->shape()) +
                      ", model expects " + ad::shape_string(out.shape()));
  }
  out = *t;
}

}  // namespace

std::vector<std::uint8_t> checkpoint_encode(const Checkpoint& ck) {
  Checkpoint& c = const_cast<Checkpoint&>(ck);  // visit() is non-const; nothing is modified
  nlohmann::ordered_json meta;
  meta["epoch"] = c.epoch;
  meta["num_classes"] = c.model.num_classes();
  meta["num_points"] = c.model.num_points();
  meta["class_names"] = c.class_names;
  meta["best_epoch"] = c.best_epoch;
  meta["adam_step"] = c.adam.step;

  std::vector<std::pair<std::string, const Tensor*>> tensors;
  c.model.visit([&](const std::string& name, Tensor& t, bool) {
    tensors.emplace_back("param/" + name, &t);
  });
  const auto params = trainable_params(c.model);
  if (c.adam.m.size() != params.size() || c.adam.v.size() != params.size()) {
    throw ContractError("checkpoint: Adam state does not match the model");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    tensors.emplace_back("adam.m/" + params[i].name, &c.adam.m[i]);
    tensors.emplace_back("adam.v/" + params[i].name, &c.adam.v[i]);
  }

  Tensor scalars = Tensor::vector({c.best_val_accuracy, c.adam.beta1, c.adam.beta2,
                                   c.adam.epsilon});
  Tensor log;
  if (!c.log.empty()) {
    log = Tensor({c.log.size(), kLogColumns});
    for (std::size_t i = 0; i < c.log.size(); ++i) {
      const EpochRecord& r = c.log[i];
      const double row[kLogColumns] = {static_cast<double>(r.epoch), r.loss, r.ce, r.kl,
                                       r.train_accuracy, r.val_accuracy};
      for (std::size_t k = 0; k < kLogColumns; ++k) log.at(i, k) = row[k];
    }
  }

  ByteWriter w;
  w.raw(std::string_view(kCheckpointMagic, 4));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(4 + (c.log.empty() ? 0 : 1) + tensors.size()));
  put_text(w, "config", config_to_json(c.config));
  put_text(w, "meta", meta.dump());
  put_text(w, "rng", c.rng_state);
  put_tensor(w, "scalars", scalars);
  if (!c.log.empty()) put_tensor(w, "log", log);
  for (const auto& [name, t] : tensors) put_tensor(w, name, *t);
  return w.bytes();
}

Checkpoint checkpoint_decode(std::vector<std::uint8_t> bytes) {
  ByteReader r(std::move(bytes));
  if (r.size() < 4 || r.raw(4) != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError("bad magic: not a PMCK checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw FormatError("unsupported PMCK version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::map<std::string, Block> blocks;
  for (std::uint32_t b = 0; b < count; ++b) {
    std::string name = r.str();
    const std::uint8_t kind = r.u8();
    if (kind == kTensorBlock) {
      const std::uint32_t rank = r.u32();
      Shape shape(rank);
      for (auto& d : shape) d = r.u32();
      const std::size_t n = ad::shape_size(shape);
      if (r.remaining() / 8 < n) throw FormatError("truncated tensor block '" + name + "'");
      std::vector<double> values(n);
      for (double& v : values) v = r.f64();
      try {
        blocks.emplace(name, Tensor(std::move(shape), std::move(values)));
      } catch (const Error& e) {
        throw FormatError("bad tensor block '" + name + "': " + e.what());
      }
    } else if (kind == kTextBlock) {
      blocks.emplace(name, r.str());
    } else {
      throw FormatError("unknown block kind " + std::to_string(kind) + " for '" + name + "'");
    }
    if (blocks.size() != b + 1) throw FormatError("duplicate checkpoint block '" + name + "'");
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after the last checkpoint block");

  Checkpoint c;
  c.config = config_from_json(need_text(blocks, "config"));
  c.rng_state = need_text(blocks, "rng");
  std::size_t num_classes = 0, num_points = 0;
  try {
    const auto meta = nlohmann::json::parse(need_text(blocks, "meta"));
    c.epoch = meta.at("epoch").get<std::uint32_t>();
    num_classes = meta.at("num_classes").get<std::size_t>();
    num_points = meta.at("num_points").get<std::size_t>();
    c.class_names = meta.at("class_names").get<std::vector<std::string>>();
    c.best_epoch = meta.at("best_epoch").get<std::uint32_t>();
    c.adam.step = meta.at("adam_step").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint metadata: ") + e.what());
  }

  Tensor scalars(Shape{4});
  fill(blocks, "scalars", scalars);
  c.best_val_accuracy = scalars[0];
  c.adam.beta1 = scalars[1];
  c.adam.beta2 = scalars[2];
  c.adam.epsilon = scalars[3];

  if (c.epoch > 0 || blocks.count("log")) {
    const auto* log = std::get_if<Tensor>(&need(blocks, "log"));
    if (!log || log->rank() != 2 || log->cols() != kLogColumns) {
      throw FormatError("checkpoint log block must be [epochs x 6]");
    }
    for (std::size_t i = 0; i < log->rows(); ++i) {
      EpochRecord rec;
      rec.epoch = static_cast<std::uint32_t>(log->at(i, 0));
      rec.loss = log->at(i, 1);
      rec.ce = log->at(i, 2);
      rec.kl = log->at(i, 3);
      rec.train_accuracy = log->at(i, 4);
      rec.val_accuracy = log->at(i, 5);
      c.log.push_back(rec);
    }
  }

  // Build the architecture from the config, then overwrite every tensor.
  Rng unused(0);
  try {
    c.model = init_model(c.config, num_classes, num_points, unused);
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint describes an invalid model: ") + e.what());
  }
  std::size_t expected = 4 + (c.log.empty() ? 0 : 1);
  c.model.visit([&](const std::string& name, Tensor& t, bool) {
    fill(blocks, "param/" + name, t);
    ++expected;
  });
  const auto params = trainable_params(c.model);
  c.adam.m.clear();
  c.adam.v.clear();
  for (const NamedParam& p : params) {
    c.adam.m.emplace_back(p.tensor->shape(), 0.0);
    c.adam.v.emplace_back(p.tensor->shape(), 0.0);
    fill(blocks, "adam.m/" + p.name, c.adam.m.back());
    fill(blocks, "adam.v/" + p.name, c.adam.v.back());
    expected += 2;
  }
  if (blocks.size() != expected) throw FormatError("checkpoint holds unrecognized blocks");
  return c;
}

void checkpoint_save(const Checkpoint& checkpoint, const std::string& path) {
  write_file_bytes(path, checkpoint_encode(checkpoint));
}

Checkpoint checkpoint_load(const std::string& path) {
  return checkpoint_decode(read_file_bytes(path));
}

}  // namespace pointmask::train
