#pragma once
// Run manifests and artifact provenance, both as flat key=value text.
//
// Every artifact `x` gets a sidecar `x.meta` naming the kind, the config hash
// of the run that wrote it, its content hash and the corpus it refers to.
// Consumers check the sidecar before trusting the artifact.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "litrank/common.hpp"

namespace litrank {

inline std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  Fnv1a h;
  std::string buf(1 << 16, '\0');
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    h.update(std::string_view(buf.data(), got));
  }
  return h.hex();
}

// Ordered key=value record; keys keep insertion order on output.
class KeyValues {
 public:
  void set(const std::string& key, std::string value) {
    for (auto& [k, v] : items_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    items_.emplace_back(key, std::move(value));
  }
  std::string get(const std::string& key, const std::string& fallback = {}) const {
    for (const auto& [k, v] : items_)
      if (k == key) return v;
    return fallback;
  }
  bool contains(const std::string& key) const {
    for (const auto& [k, v] : items_)
      if (k == key) return true;
    return false;
  }
  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : items_) out += k + "=" + v + "\n";
    return out;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << str();
    if (!out) throw InputError("write failed: " + path.string());
  }

  static KeyValues read(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw InputError("missing file " + path.string());
    KeyValues kv;
    for (const auto& line : read_lines(path.string())) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      kv.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return kv;
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

struct ArtifactMeta {
  std::string kind;  // facts, index, queries, ranking, checkpoint, report, synthetic
  std::string config_hash;
  std::string content_hash;
  std::string corpus_hash;  // empty for synthetic artifacts
  std::string split;
};

inline std::filesystem::path meta_path(const std::filesystem::path& artifact) {
  auto p = artifact;
  p += ".meta";
  return p;
}

// Hashes `artifact` and writes its sidecar. Returns the content hash.
inline std::string seal_artifact(const std::filesystem::path& artifact, ArtifactMeta meta) {
  meta.content_hash = file_hash(artifact);
  KeyValues kv;
  kv.set("kind", meta.kind);
  kv.set("config_hash", meta.config_hash);
  kv.set("content_hash", meta.content_hash);
  kv.set("corpus_hash", meta.corpus_hash);
  kv.set("split", meta.split);
  kv.write(meta_path(artifact));
  return meta.content_hash;
}

// Missing artifact: InputError. Missing/mismatched sidecar or edited content:
// InvariantError.
inline ArtifactMeta open_artifact(const std::filesystem::path& artifact, const std::string& kind) {
  if (!std::filesystem::exists(artifact)) throw InputError("missing " + kind + " artifact " + artifact.string());
  const auto mp = meta_path(artifact);
  if (!std::filesystem::exists(mp)) throw InvariantError(artifact.string() + " has no provenance sidecar");
  const auto kv = KeyValues::read(mp);
  ArtifactMeta m{kv.get("kind"), kv.get("config_hash"), kv.get("content_hash"), kv.get("corpus_hash"), kv.get("split")};
  if (m.kind != kind) throw InvariantError(artifact.string() + " is a " + m.kind + " artifact, expected " + kind);
  if (file_hash(artifact) != m.content_hash)
    throw InvariantError(artifact.string() + " does not match the content hash in its sidecar");
  return m;
}

// Manifest of one command run: settings, seed, and content hashes of what it
// read and wrote. Paths are recorded by file name only so that identical runs
// into different directories produce identical manifests.
class RunManifest {
 public:
  RunManifest(std::string command, const std::map<std::string, std::string>& settings, std::string config_hash,
              std::uint64_t seed) {
    kv_.set("command", std::move(command));
    kv_.set("config_hash", std::move(config_hash));
    kv_.set("seed", std::to_string(seed));
    for (const auto& [k, v] : settings) kv_.set("config." + k, v);
  }

  void input(const std::filesystem::path& p, const std::string& hash) {
    kv_.set("input." + p.filename().string(), hash);
  }
  void output(const std::filesystem::path& p, const std::string& hash) {
    kv_.set("output." + p.filename().string(), hash);
  }
  void result(const std::string& key, std::string value) { kv_.set("result." + key, std::move(value)); }

  const KeyValues& values() const { return kv_; }
  void write(const std::filesystem::path& path) const { kv_.write(path); }

 private:
  KeyValues kv_;
};

}  // namespace litrank
