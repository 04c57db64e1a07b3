// Copyright 2026 The lpvred Authors
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

/** \file
    Artifact files.

    Binary container layout (all integers little-endian):

        "LPVC"            4 bytes
        version           u32
        header length     u64
        header            UTF-8 JSON {"meta": {...}, "arrays": [{"name","rows","cols"}, ...]}
        payloads          f64 little-endian, row-major, in header order

    CSV files use a header line and 17 significant digits.
*/

#ifndef LPVRED_IO_HPP
#define LPVRED_IO_HPP

#include "dnn.hpp"
#include "lpv.hpp"
#include "metrics.hpp"
#include "pca.hpp"
#include "sim.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lpvred {

inline constexpr char kContainerMagic[4] = {'L', 'P', 'V', 'C'};
inline constexpr std::uint32_t kContainerVersion = 1;

class IoError : public Error {
 public:
  using Error::Error;
};

struct Container {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Mat>> arrays;

  void add(const std::string& name, Mat m) {
    if (has(name)) throw IoError("container: duplicate array '" + name + "'");
    arrays.emplace_back(name, std::move(m));
  }
  bool has(const std::string& name) const {
    for (const auto& [n, _] : arrays)
      if (n == name) return true;
    return false;
  }
  const Mat& get(const std::string& name) const {
    for (const auto& [n, m] : arrays)
      if (n == name) return m;
    throw IoError("container: missing array '" + name + "'");
  }
  Vec vec(const std::string& name) const {
    const Mat& m = get(name);
    return Eigen::Map<const Vec>(m.data(), m.size());
  }
};

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("container: truncated file");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace detail

inline std::string encode_container(const Container& c) {
  nlohmann::json header{{"meta", c.meta}, {"arrays", nlohmann::json::array()}};
  for (const auto& [name, m] : c.arrays) header["arrays"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  const std::string h = header.dump();
  std::string out(kContainerMagic, 4);
  detail::put_le<std::uint32_t>(out, kContainerVersion);
  detail::put_le<std::uint64_t>(out, h.size());
  out += h;
  for (const auto& [name, m] : c.arrays)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index col = 0; col < m.cols(); ++col) detail::put_le<double>(out, m(r, col));
  return out;
}

inline Container decode_container(const std::string& data) {
  if (data.size() < 16 || std::memcmp(data.data(), kContainerMagic, 4) != 0)
    throw IoError("container: bad magic (not an LPVC file)");
  std::size_t pos = 4;
  const auto version = detail::get_le<std::uint32_t>(data, pos);
  if (version != kContainerVersion) throw IoError("container: unsupported version " + std::to_string(version));
  const auto hlen = detail::get_le<std::uint64_t>(data, pos);
  if (pos + hlen > data.size()) throw IoError("container: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(data.substr(pos, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("container: malformed header: ") + e.what());
  }
  pos += hlen;
  Container c;
  c.meta = header.value("meta", nlohmann::json::object());
  for (const auto& a : header.at("arrays")) {
    const auto rows = a.at("rows").get<Eigen::Index>();
    const auto cols = a.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0) throw IoError("container: negative array shape");
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index col = 0; col < cols; ++col) m(r, col) = detail::get_le<double>(data, pos);
    c.arrays.emplace_back(a.at("name").get<std::string>(), std::move(m));
  }
  if (pos != data.size()) throw IoError("container: trailing bytes after payload");
  return c;
}

inline void write_container(const std::filesystem::path& path, const Container& c) {
  detail::write_file(path, encode_container(c));
}

inline Container read_container(const std::filesystem::path& path) {
  try {
    return decode_container(detail::read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  detail::write_file(path, j.dump(2) + "\n");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

/// Table with named columns, written with 17 significant digits.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> r) {
    require_dims(r.size() == header.size(), "csv: row width differs from header");
    rows.push_back(std::move(r));
  }
  std::string str() const {
    std::ostringstream os;
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
    return os.str();
  }
  Eigen::Index column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<Eigen::Index>(i);
    throw IoError("csv: no column '" + name + "'");
  }
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) { detail::write_file(path, t.str()); }

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty CSV");
  t.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) t.add_row(split(line));
  return t;
}

// ---------------------------------------------------------------------------
// Artifact encoders

namespace detail {

inline Mat row_of(const std::vector<int>& v) {
  Mat m(1, static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}
inline Mat row_of(const std::vector<Eigen::Index>& v) {
  Mat m(1, static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = static_cast<double>(v[i]);
  return m;
}
inline std::vector<Eigen::Index> indices_of(const Mat& m) {
  std::vector<Eigen::Index> out(static_cast<size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) out[static_cast<size_t>(i)] = static_cast<Eigen::Index>(m.data()[i]);
  return out;
}
inline nlohmann::json dims_json(const ModelDims& d) {
  return {{"nx", d.nx}, {"nu", d.nu}, {"nw", d.nw}, {"ny", d.ny}};
}
inline ModelDims dims_from(const nlohmann::json& j) {
  return {j.at("nx").get<int>(), j.at("nu").get<int>(), j.at("nw").get<int>(), j.at("ny").get<int>()};
}
inline Mat col_of(const Vec& v) { return v; }

}  // namespace detail

inline Container encode_samples(const SampleSet& s) {
  Container c;
  c.meta = {{"kind", "sample_set"}, {"model", s.model_id}, {"seed", s.seed}, {"h", s.h}, {"N", s.size()}};
  c.add("X", s.X);
  c.add("U", s.U);
  c.add("W", s.W);
  c.add("trajectory", detail::row_of(s.trajectory));
  c.add("time_index", detail::row_of(s.time_index));
  Mat inr(1, s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) inr(0, k) = s.in_region[static_cast<size_t>(k)] ? 1.0 : 0.0;
  c.add("in_region", inr);
  return c;
}

inline SampleSet decode_samples(const Container& c) {
  if (c.meta.value("kind", "") != "sample_set") throw IoError("not a sample set container");
  SampleSet s;
  s.X = c.get("X");
  s.U = c.get("U");
  s.W = c.get("W");
  s.model_id = c.meta.at("model").get<std::string>();
  s.seed = c.meta.at("seed").get<std::uint64_t>();
  s.h = c.meta.at("h").get<double>();
  for (auto i : detail::indices_of(c.get("trajectory"))) s.trajectory.push_back(static_cast<int>(i));
  for (auto i : detail::indices_of(c.get("time_index"))) s.time_index.push_back(static_cast<int>(i));
  const Mat& inr = c.get("in_region");
  for (Eigen::Index k = 0; k < inr.size(); ++k) s.in_region.push_back(inr.data()[k] != 0.0);
  if (s.U.cols() != s.X.cols() || s.W.cols() != s.X.cols() || s.trajectory.size() != static_cast<size_t>(s.X.cols()))
    throw IoError("sample set arrays disagree in length");
  return s;
}

inline Container encode_variation(const VariationDataset& ds) {
  Container c;
  c.meta = {{"kind", "variation_dataset"},
            {"dims", detail::dims_json(ds.layout.dims)},
            {"blocks", to_string(ds.layout.blocks)},
            {"n_pi", ds.n_pi()},
            {"n_varying", ds.n_varying()},
            {"N", ds.n_samples()},
            {"skipped", ds.skipped}};
  c.add("Pi", ds.Pi);
  c.add("varying_rows", detail::row_of(ds.varying_rows));
  c.add("sample_index", detail::row_of(ds.sample_index));
  return c;
}

inline VariationDataset decode_variation(const Container& c) {
  if (c.meta.value("kind", "") != "variation_dataset") throw IoError("not a variation dataset container");
  VariationDataset ds;
  ds.layout = {detail::dims_from(c.meta.at("dims")), gamma_blocks_from_string(c.meta.at("blocks"))};
  ds.Pi = c.get("Pi");
  ds.varying_rows = detail::indices_of(c.get("varying_rows"));
  ds.sample_index = detail::indices_of(c.get("sample_index"));
  ds.skipped = c.meta.value("skipped", std::size_t{0});
  if (ds.Pi.rows() != ds.layout.size()) throw IoError("variation dataset: Pi rows do not match the layout");
  return ds;
}

/// Affine model arrays M0, M1..Mk plus dims and region in the header.
inline Container encode_lpv(const AffineLpvModel& m) {
  Container c;
  c.meta = {{"kind", "affine_lpv"}, {"dims", detail::dims_json(m.dims)}, {"n_theta", m.n_sched()}};
  c.meta["region"] = m.region ? m.region->to_json() : nlohmann::json(nullptr);
  c.add("M0", m.M0);
  for (int i = 0; i < m.n_sched(); ++i) c.add("M" + std::to_string(i + 1), m.Mi[static_cast<size_t>(i)]);
  return c;
}

inline AffineLpvModel decode_lpv(const Container& c) {
  AffineLpvModel m;
  m.dims = detail::dims_from(c.meta.at("dims"));
  m.M0 = c.get("M0");
  const int n = c.meta.at("n_theta").get<int>();
  for (int i = 0; i < n; ++i) m.Mi.push_back(c.get("M" + std::to_string(i + 1)));
  if (c.meta.contains("region") && !c.meta.at("region").is_null()) m.region = BoxRegion::from_json(c.meta.at("region"));
  return m;
}

/// JSON summary of an affine model (for tooling that does not read binaries).
inline nlohmann::json lpv_summary(const AffineLpvModel& m) {
  nlohmann::json j{{"dims", detail::dims_json(m.dims)},
                   {"n_theta", m.n_sched()},
                   {"matrix_rows", m.M0.rows()},
                   {"matrix_cols", m.M0.cols()}};
  j["region"] = m.region ? m.region->to_json() : nlohmann::json(nullptr);
  return j;
}

inline Container encode_pca(const PcaReduction& r) {
  Container c = encode_lpv(r.lpv());
  c.meta["kind"] = "pca_reduction";
  c.meta["model"] = r.model()->id();
  c.meta["model_parameters"] = r.model()->parameters();
  c.meta["blocks"] = to_string(r.layout().blocks);
  c.meta["normalization"] = to_string(r.normalizer().mode);
  c.meta["n_s"] = r.n_sched();
  c.meta["training_samples"] = r.training_samples();
  c.add("Us", r.Us());
  c.add("center", detail::col_of(r.normalizer().center));
  c.add("scale", detail::col_of(r.normalizer().scale));
  c.add("sigma", detail::col_of(r.singular_values()));
  return c;
}

inline PcaReduction decode_pca(const Container& c, ModelPtr model) {
  if (c.meta.value("kind", "") != "pca_reduction") throw IoError("not a PCA reduction container");
  if (c.meta.at("model").get<std::string>() != model->id()) throw IoError("PCA reduction was fitted on another model");
  const GammaLayout layout{model->dims(), gamma_blocks_from_string(c.meta.at("blocks"))};
  Normalizer n{norm_mode_from_string(c.meta.at("normalization")), c.vec("center"), c.vec("scale")};
  PcaReduction r(std::move(model), layout, std::move(n), c.get("Us"), c.vec("sigma"),
                 c.meta.at("training_samples").get<Eigen::Index>());
  if (c.meta.contains("region") && !c.meta.at("region").is_null()) r.set_region(BoxRegion::from_json(c.meta.at("region")));
  return r;
}

inline Container encode_dnn(const DnnReduction& r) {
  Container c = encode_lpv(r.lpv());
  const MlpShape& s = r.network().shape();
  c.meta["kind"] = "dnn_reduction";
  c.meta["model"] = r.model()->id();
  c.meta["model_parameters"] = r.model()->parameters();
  c.meta["blocks"] = to_string(r.layout().blocks);
  c.meta["normalization"] = to_string(r.input_normalizer().mode);
  c.meta["network"] = {{"n_in", s.n_in},       {"hidden", s.hidden}, {"n_theta", s.n_theta},
                       {"n_out", s.n_out},     {"bypass", s.bypass}, {"n_params", r.network().n_params()}};
  c.meta["best_epoch"] = r.best_epoch;
  c.add("params", detail::col_of(r.network().params()));
  c.add("in_center", detail::col_of(r.input_normalizer().center));
  c.add("in_scale", detail::col_of(r.input_normalizer().scale));
  c.add("out_center", detail::col_of(r.output_normalizer().center));
  c.add("out_scale", detail::col_of(r.output_normalizer().scale));
  c.add("varying_rows", detail::row_of(r.varying_rows()));
  c.add("constant_gamma", detail::col_of(r.constant_gamma()));
  Mat curve(3, static_cast<Eigen::Index>(r.curve.size()));
  for (size_t i = 0; i < r.curve.size(); ++i)
    curve.col(static_cast<Eigen::Index>(i)) << r.curve[i].epoch, r.curve[i].train_loss, r.curve[i].val_loss;
  c.add("curve", curve);
  return c;
}

inline DnnReduction decode_dnn(const Container& c, ModelPtr model) {
  if (c.meta.value("kind", "") != "dnn_reduction") throw IoError("not a DNN reduction container");
  if (c.meta.at("model").get<std::string>() != model->id()) throw IoError("DNN reduction was trained on another model");
  const auto& n = c.meta.at("network");
  MlpShape s;
  s.n_in = n.at("n_in");
  s.hidden = n.at("hidden").get<std::vector<int>>();
  s.n_theta = n.at("n_theta");
  s.n_out = n.at("n_out");
  s.bypass = n.at("bypass");
  MlpNetwork net(s);
  const Vec p = c.vec("params");
  if (p.size() != net.n_params()) throw IoError("DNN checkpoint: parameter count mismatch");
  net.params() = p;
  const NormMode mode = norm_mode_from_string(c.meta.at("normalization"));
  const GammaLayout layout{model->dims(), gamma_blocks_from_string(c.meta.at("blocks"))};
  DnnReduction r(std::move(model), layout, std::move(net), Normalizer{mode, c.vec("in_center"), c.vec("in_scale")},
                 Normalizer{mode, c.vec("out_center"), c.vec("out_scale")}, detail::indices_of(c.get("varying_rows")),
                 c.vec("constant_gamma"));
  r.best_epoch = c.meta.value("best_epoch", 0);
  const Mat& curve = c.get("curve");
  for (Eigen::Index i = 0; i < curve.cols(); ++i)
    r.curve.push_back({static_cast<int>(curve(0, i)), curve(1, i), curve(2, i)});
  if (c.meta.contains("region") && !c.meta.at("region").is_null()) r.set_region(BoxRegion::from_json(c.meta.at("region")));
  return r;
}

}  // namespace lpvred

#endif  // LPVRED_IO_HPP
