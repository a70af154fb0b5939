// Copyright 2026 The Biasforge Authors.
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

#include "biasforge/cluster.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "biasforge/errors.h"
#include "biasforge/nearest_neighbor.h"
#include "biasforge/random.h"
#include "distance_kernels.h"
#include "jsonl.h"
#include "screen_kernels.h"

namespace biasforge {

Dendrogram::Dendrogram(size_t leaf_count, std::vector<Merge> merges)
    : leaf_count_(leaf_count), merges_(std::move(merges)) {
  if (leaf_count_ < 1 || merges_.size() + 1 != leaf_count_) {
    throw DataError("dendrogram: expected n-1 merges");
  }
  std::vector<char> used(2 * leaf_count_, 0);
  double previous = 0.0;
  for (size_t i = 0; i < merges_.size(); ++i) {
    const Merge& m = merges_[i];
    const size_t node = leaf_count_ + i;
    if (m.left >= node || m.right >= node || m.left == m.right) {
      throw DataError("dendrogram: merge " + std::to_string(i) +
                      " references an unavailable node");
    }
    if (used[m.left] || used[m.right]) {
      throw DataError("dendrogram: node reused as a child");
    }
    used[m.left] = used[m.right] = 1;
    if (!(m.height >= previous)) {
      throw DataError("dendrogram: heights must be non-decreasing");
    }
    previous = m.height;
  }
  if (!merges_.empty() && merges_.back().size != leaf_count_) {
    throw DataError("dendrogram: final node must contain every leaf");
  }
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), size_t{0});
  }
  size_t Find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Returns the surviving root.
  size_t Union(size_t a, size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return a;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }
  size_t SizeOf(size_t x) { return size_[Find(x)]; }

 private:
  std::vector<size_t> parent_;
  std::vector<size_t> size_;
};

// Below this dimensionality the screen costs more than it saves; search in
// double precision directly.
constexpr size_t kScreenMinDim = 16;

// Per-coordinate relative error of double -> float -> bfloat16 rounding
// (2^-9 + 2^-24, rounded up), plus an absolute term covering values that
// underflow the single-precision normal range.
constexpr double kMirrorRelativeError = 1.01 / 512.0;
constexpr double kMirrorAbsoluteError = 1e-36;
// Screening is skipped for data this large, where bfloat16 could overflow.
constexpr double kMirrorMaxNorm = 1e36;

// Active clusters live in compacted slots [0, active). Each slot holds the
// centroid in double precision (authoritative) and a bfloat16 mirror used to
// screen candidates at a quarter of the memory traffic.
class NnChainWard {
 public:
  explicit NnChainWard(const EmbeddingSet& emb)
      : n_(emb.rows()), d_(emb.dim()), screen_(d_ >= kScreenMinDim) {
    centroid_.resize(n_ * d_);
    // Ward distances are translation invariant; centering keeps the
    // single-precision rounding error proportional to the data spread.
    std::vector<double> mean(d_, 0.0);
    for (size_t i = 0; i < n_; ++i) {
      auto row = emb.Row(i);
      for (size_t j = 0; j < d_; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= static_cast<double>(n_);
    for (size_t i = 0; i < n_; ++i) {
      auto row = emb.Row(i);
      for (size_t j = 0; j < d_; ++j) {
        centroid_[i * d_ + j] = static_cast<double>(row[j]) - mean[j];
      }
    }
    norm_.resize(n_);
    for (size_t i = 0; i < n_; ++i) {
      norm_[i] = CentroidNorm(i);
      max_norm_ = std::max(max_norm_, norm_[i]);
    }
    screen_ = screen_ && max_norm_ <= kMirrorMaxNorm;
    if (screen_) {
      mirror_.resize(n_ * d_);
      for (size_t i = 0; i < n_ * d_; ++i) {
        mirror_[i] = internal::ToBf16(static_cast<float>(centroid_[i]));
      }
      query_.resize(d_);
    }
    size_.assign(n_, 1);
    node_.resize(n_);
    rep_.resize(n_);
    created_at_.assign(n_, 0.0);
    std::iota(node_.begin(), node_.end(), size_t{0});
    std::iota(rep_.begin(), rep_.end(), size_t{0});
    slot_of_.assign(2 * n_, kNone);
    for (size_t i = 0; i < n_; ++i) slot_of_[i] = i;
    active_ = n_;
    screened_.resize(n_);
  }

  struct RawMerge {
    size_t rep_a;
    size_t rep_b;
    double height;
  };

  std::vector<RawMerge> Run() {
    std::vector<RawMerge> merges;
    merges.reserve(n_ - 1);
    std::vector<size_t> chain;
    size_t next_node = n_;
    while (active_ > 1) {
      if (chain.empty()) chain.push_back(node_[0]);
      size_t a = 0;
      size_t b = 0;
      double best = 0.0;
      while (true) {
        a = chain.back();
        const size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : kNone;
        std::tie(b, best) = Nearest(slot_of_[a], prev);
        if (b == prev) break;
        chain.push_back(b);
      }
      chain.pop_back();
      chain.pop_back();
      const size_t sa = slot_of_[a];
      const size_t sb = slot_of_[b];
      // Exact Ward linkage is reducible, so a parent never sits below its
      // children; clamp rounding-level inversions to keep that ordering.
      const double height = std::max(
          {std::sqrt(best), created_at_[sa], created_at_[sb]});
      merges.push_back({rep_[sa], rep_[sb], height});
      MergeSlots(sa, sb, next_node++, height);
    }
    return merges;
  }

 private:
  static constexpr size_t kNone = std::numeric_limits<size_t>::max();

  double CentroidNorm(size_t slot) const {
    double ss = 0.0;
    const double* c = &centroid_[slot * d_];
    for (size_t j = 0; j < d_; ++j) ss += c[j] * c[j];
    return std::sqrt(ss);
  }

  double Weight(size_t sa, size_t sb) const {
    const double na = static_cast<double>(size_[sa]);
    const double nb = static_cast<double>(size_[sb]);
    return 2.0 * na * nb / (na + nb);
  }

  double ExactWard(size_t sa, size_t sb) const {
    return Weight(sa, sb) * internal::SquaredDistance<double>(
                                &centroid_[sa * d_], &centroid_[sb * d_], d_);
  }

  static bool Prefer(double value, size_t node, double best, size_t best_node,
                     size_t prev) {
    if (value < best) return true;
    if (value > best) return false;
    if (best_node == prev) return false;
    if (node == prev) return true;
    return node < best_node;
  }

  // Nearest active node to the node in slot `sa` under squared Ward distance.
  std::pair<size_t, double> Nearest(size_t sa, size_t prev) {
    size_t best_node = kNone;
    double best = std::numeric_limits<double>::infinity();
    if (!screen_) {
      for (size_t s = 0; s < active_; ++s) {
        if (s == sa) continue;
        const double v = ExactWard(sa, s);
        if (Prefer(v, node_[s], best, best_node, prev)) {
          best = v;
          best_node = node_[s];
        }
      }
      return {best_node, best};
    }

    for (size_t j = 0; j < d_; ++j) {
      query_[j] = internal::FromBf16(mirror_[sa * d_ + j]);
    }
    const float* query = query_.data();
    const long active = static_cast<long>(active_);
    const double na = static_cast<double>(size_[sa]);
    constexpr long kChunk = 1024;
#pragma omp parallel for schedule(static) if (active_ * d_ > (1u << 16))
    for (long begin = 0; begin < active; begin += kChunk) {
      const size_t lo = static_cast<size_t>(begin);
      const size_t hi = std::min(active_, lo + kChunk);
      float dist[kChunk];
      internal::ScreenDistancesBf16(query, &mirror_[lo * d_], hi - lo, d_,
                                    dist);
      for (size_t s = lo; s < hi; ++s) {
        const double ns = static_cast<double>(size_[s]);
        screened_[s] = 2.0 * na * ns / (na + ns) * dist[s - lo];
      }
    }
    screened_[sa] = std::numeric_limits<double>::infinity();
    double v_min = std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < active_; ++s) v_min = std::min(v_min, screened_[s]);

    // With v = w * f for screened squared distance f, the exact root distance
    // r of any slot satisfies
    //   sqrt(v / (1 + g)) - sqrt(w) p <= sqrt(w) r <= sqrt(v / (1 - g)) + sqrt(w) p
    // where g bounds the float-sum relative error and p the mirror rounding,
    // e * (|c_a| + |c_s|) <= e * (|c_a| + max norm). Since w < 2 n_a, any slot
    // with v above the threshold below cannot beat the slot achieving v_min.
    const double gamma = internal::FloatSumRelativeError(d_);
    const double slack =
        std::sqrt(2.0 * na) *
        (kMirrorRelativeError * (norm_[sa] + max_norm_) + kMirrorAbsoluteError);
    const double upper = std::sqrt(v_min / (1.0 - gamma)) + slack;
    const double root_cut = (upper * (1.0 + 1e-12) + slack) * std::sqrt(1.0 + gamma);
    const double threshold = root_cut * root_cut * (1.0 + 1e-12);
    for (size_t s = 0; s < active_; ++s) {
      if (s == sa || screened_[s] > threshold) continue;
      const double v = ExactWard(sa, s);
      if (Prefer(v, node_[s], best, best_node, prev)) {
        best = v;
        best_node = node_[s];
      }
    }
    return {best_node, best};
  }

  void MergeSlots(size_t sa, size_t sb, size_t new_node, double height) {
    const double na = static_cast<double>(size_[sa]);
    const double nb = static_cast<double>(size_[sb]);
    double* ca = &centroid_[sa * d_];
    const double* cb = &centroid_[sb * d_];
    for (size_t j = 0; j < d_; ++j) ca[j] = (na * ca[j] + nb * cb[j]) / (na + nb);
    size_[sa] += size_[sb];
    rep_[sa] = std::min(rep_[sa], rep_[sb]);
    created_at_[sa] = height;
    slot_of_[node_[sa]] = kNone;
    slot_of_[node_[sb]] = kNone;
    node_[sa] = new_node;
    slot_of_[new_node] = sa;
    if (screen_) {
      for (size_t j = 0; j < d_; ++j) {
        mirror_[sa * d_ + j] = internal::ToBf16(static_cast<float>(ca[j]));
      }
      norm_[sa] = CentroidNorm(sa);
    }
    RemoveSlot(sb);
  }

  void RemoveSlot(size_t s) {
    const size_t last = active_ - 1;
    if (s != last) {
      std::copy_n(&centroid_[last * d_], d_, &centroid_[s * d_]);
      if (screen_) {
        std::copy_n(&mirror_[last * d_], d_, &mirror_[s * d_]);
        norm_[s] = norm_[last];
      }
      size_[s] = size_[last];
      node_[s] = node_[last];
      rep_[s] = rep_[last];
      created_at_[s] = created_at_[last];
      slot_of_[node_[s]] = s;
    }
    --active_;
  }

  size_t n_;
  size_t d_;
  bool screen_;
  size_t active_ = 0;
  std::vector<double> centroid_;
  std::vector<uint16_t> mirror_;
  std::vector<float> query_;
  std::vector<double> norm_;
  // Merged centroids are convex combinations, so no norm ever exceeds this.
  double max_norm_ = 0.0;
  std::vector<size_t> size_;
  std::vector<size_t> node_;
  std::vector<size_t> rep_;
  std::vector<double> created_at_;
  std::vector<size_t> slot_of_;
  std::vector<double> screened_;
};

}  // namespace

Dendrogram WardLinkage(const EmbeddingSet& emb) {
  const size_t n = emb.rows();
  if (n < 2) throw DataError("ward linkage needs at least 2 rows");
  auto raw = NnChainWard(emb).Run();
  std::stable_sort(raw.begin(), raw.end(),
                   [](const auto& x, const auto& y) { return x.height < y.height; });

  UnionFind sets(n);
  std::vector<size_t> label(n);
  std::iota(label.begin(), label.end(), size_t{0});
  std::vector<Merge> merges;
  merges.reserve(n - 1);
  for (size_t i = 0; i < raw.size(); ++i) {
    const size_t ra = sets.Find(raw[i].rep_a);
    const size_t rb = sets.Find(raw[i].rep_b);
    const size_t la = label[ra];
    const size_t lb = label[rb];
    const size_t root = sets.Union(ra, rb);
    label[root] = n + i;
    merges.push_back({std::min(la, lb), std::max(la, lb), raw[i].height,
                      sets.SizeOf(root)});
  }
  return Dendrogram(n, std::move(merges));
}

std::vector<int> CutLabels(const Dendrogram& dendrogram, size_t k) {
  const size_t n = dendrogram.leaf_count();
  if (k < 1 || k > n) {
    throw UsageError("cut: k must lie in [1, " + std::to_string(n) + "]");
  }
  UnionFind sets(n);
  std::vector<size_t> rep(2 * n - 1);
  std::iota(rep.begin(), rep.begin() + static_cast<ptrdiff_t>(n), size_t{0});
  for (size_t i = 0; i < n - k; ++i) {
    const Merge& m = dendrogram.merges()[i];
    rep[n + i] = sets.Union(rep[m.left], rep[m.right]);
  }
  std::vector<int> labels(n, -1);
  std::vector<int> index_of_root(n, -1);
  int next = 0;
  for (size_t leaf = 0; leaf < n; ++leaf) {
    const size_t root = sets.Find(leaf);
    if (index_of_root[root] < 0) index_of_root[root] = next++;
    labels[leaf] = index_of_root[root];
  }
  return labels;
}

ClusterAssignment Cut(const Dendrogram& dendrogram, size_t k,
                      std::vector<std::string> ids) {
  if (ids.size() != dendrogram.leaf_count()) {
    throw UsageError("cut: id count does not match leaf count");
  }
  ClusterAssignment out;
  out.cluster_of = CutLabels(dendrogram, k);
  out.ids = std::move(ids);
  out.k = static_cast<int>(k);
  return out;
}

ClusterAssignment ClusterScaled(const EmbeddingSet& emb, size_t k,
                                const ScalingOptions& options) {
  if (!(options.sample_fraction > 0.0 && options.sample_fraction <= 1.0)) {
    throw UsageError("sample fraction must lie in (0, 1]");
  }
  const size_t n = emb.rows();
  if (n <= options.threshold_n) {
    ClusterAssignment out = Cut(WardLinkage(emb), k, emb.ids());
    out.provenance = {"ward", options.seed, false, 1.0};
    return out;
  }
  const auto sample_size = static_cast<size_t>(
      std::floor(options.sample_fraction * static_cast<double>(n)));
  if (sample_size < k || sample_size < 2) {
    throw UsageError("sample of " + std::to_string(sample_size) +
                     " rows is smaller than k = " + std::to_string(k));
  }
  const std::vector<size_t> rows = SampleIndices(n, sample_size, options.seed);
  const EmbeddingSet sample = emb.Select(rows);
  const std::vector<int> sample_labels = CutLabels(WardLinkage(sample), k);

  ClusterAssignment out;
  out.ids = emb.ids();
  out.cluster_of.assign(n, -1);
  out.k = static_cast<int>(k);
  out.provenance = {"ward", options.seed, true, options.sample_fraction};
  std::vector<size_t> rest;
  rest.reserve(n - sample_size);
  {
    size_t next = 0;
    for (size_t r = 0; r < n; ++r) {
      if (next < rows.size() && rows[next] == r) {
        out.cluster_of[r] = sample_labels[next++];
      } else {
        rest.push_back(r);
      }
    }
  }
  if (!rest.empty()) {
    const EmbeddingSet queries = emb.Select(rest);
    const std::vector<size_t> nn = NearestNeighbors(queries, sample);
    for (size_t i = 0; i < rest.size(); ++i) {
      out.cluster_of[rest[i]] = sample_labels[nn[i]];
    }
  }
  return out;
}

PseudoLabelFile ExportPseudoLabels(const EmbeddingSet& emb, size_t m,
                                   const ScalingOptions& options) {
  PseudoLabelFile out = ClusterScaled(emb, m, options);
  out.provenance.algorithm = "ward-pseudo-labels";
  return out;
}

int ClusterAssignment::ClusterOf(std::string_view id) const {
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return cluster_of[i];
  }
  throw DataError("assignment: unknown id '" + std::string(id) + "'");
}

void ClusterAssignment::Validate() const {
  if (ids.size() != cluster_of.size()) {
    throw DataError("assignment: ids and clusters differ in length");
  }
  if (ids.empty()) throw DataError("assignment: no assigned ids");
  if (k < 1) throw DataError("assignment: k must be >= 1");
  std::set<std::string_view> seen;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (!seen.insert(ids[i]).second) {
      throw DataError("assignment: duplicate id '" + ids[i] + "'");
    }
    if (cluster_of[i] < 0 || cluster_of[i] >= k) {
      throw DataError("assignment: cluster index out of range for '" + ids[i] + "'");
    }
  }
}

std::string SerializeAssignment(const ClusterAssignment& assignment) {
  assignment.Validate();
  const auto& p = assignment.provenance;
  std::string out = Json{{"_provenance",
                          {{"algorithm", p.algorithm},
                           {"seed", p.seed},
                           {"sampled", p.sampled},
                           {"sample_fraction", p.sample_fraction},
                           {"k", assignment.k}}}}
                        .dump();
  out += '\n';
  for (size_t i = 0; i < assignment.ids.size(); ++i) {
    out += Json{{"id", assignment.ids[i]}, {"cluster", assignment.cluster_of[i]}}
               .dump();
    out += '\n';
  }
  return out;
}

ClusterAssignment ParseAssignment(std::string_view text) {
  ClusterAssignment out;
  std::optional<int> declared_k;
  bool first = true;
  internal::ForEachJsonLine(text, "assignment", [&](const Json& rec, size_t line_no) {
    if (first && rec.contains("_provenance")) {
      first = false;
      const Json& p = rec["_provenance"];
      try {
        out.provenance.algorithm = p.value("algorithm", "ward");
        out.provenance.seed = p.value("seed", uint64_t{0});
        out.provenance.sampled = p.value("sampled", false);
        out.provenance.sample_fraction = p.value("sample_fraction", 1.0);
        if (p.contains("k")) declared_k = p["k"].get<int>();
      } catch (const Json::exception& e) {
        internal::LineError("assignment", line_no, e.what());
      }
      return;
    }
    first = false;
    out.ids.push_back(internal::StringMember(rec, "id", "assignment", line_no));
    auto it = rec.find("cluster");
    if (it == rec.end() || !it->is_number_integer()) {
      internal::LineError("assignment", line_no, "missing integer cluster");
    }
    out.cluster_of.push_back(it->get<int>());
  });
  if (declared_k) {
    out.k = *declared_k;
  } else if (!out.cluster_of.empty()) {
    out.k = *std::max_element(out.cluster_of.begin(), out.cluster_of.end()) + 1;
  }
  out.Validate();
  return out;
}

ClusterAssignment LoadAssignment(const std::filesystem::path& path) {
  return ParseAssignment(ReadFile(path));
}

void WriteAssignment(const ClusterAssignment& assignment,
                     const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeAssignment(assignment));
}

}  // namespace biasforge
