#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "i2v/errors.hpp"
#include "i2v/types.hpp"

namespace i2v {

inline constexpr std::string_view kUnknownTaxonomy = "_unknown";

// item -> taxonomy id, with the exact inverse kept alongside. Items without
// an entry fall into the shared "_unknown" bucket once cover_sessions() has
// run over the corpus.
class TaxonomyMap {
 public:
  void assign(const std::string& item, const std::string& taxonomy) {
    auto it = forward_.find(item);
    if (it != forward_.end()) {
      if (it->second == taxonomy) return;
      remove_reverse(it->second, item);
      it->second = taxonomy;
    } else {
      forward_.emplace(item, taxonomy);
    }
    insert_reverse(taxonomy, item);
  }

  bool contains(const std::string& item) const {
    return forward_.count(item) != 0;
  }

  const std::string& taxonomy_of(const std::string& item) const {
    static const std::string unknown{kUnknownTaxonomy};
    auto it = forward_.find(item);
    return it == forward_.end() ? unknown : it->second;
  }

  // Sorted item list of one bucket; empty if the bucket does not exist.
  const std::vector<std::string>& items_in(const std::string& taxonomy) const {
    static const std::vector<std::string> empty;
    auto it = reverse_.find(taxonomy);
    return it == reverse_.end() ? empty : it->second;
  }

  // Ensures every item occurring in the sessions has an entry, assigning
  // "_unknown" to items missing from the source file.
  void cover_sessions(std::span<const Session> sessions) {
    for (const Session& s : sessions)
      for (const PairToken& e : s.events)
        if (!contains(e.item)) assign(e.item, std::string(kUnknownTaxonomy));
  }

  std::size_t size() const { return forward_.size(); }

  const std::unordered_map<std::string, std::string>& forward() const {
    return forward_;
  }

  static TaxonomyMap parse(std::istream& in) {
    TaxonomyMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
        throw ParseError("taxonomy line must be <item>\\t<taxonomy_id>", line_no);
      if (line.find('\t', tab + 1) != std::string::npos)
        throw ParseError("taxonomy line has too many fields", line_no);
      map.assign(line.substr(0, tab), line.substr(tab + 1));
    }
    return map;
  }

  static TaxonomyMap load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open taxonomy file: " + path);
    return parse(in);
  }

  void save(std::ostream& out) const {
    std::vector<const std::string*> items;
    items.reserve(forward_.size());
    for (const auto& [item, tax] : forward_) items.push_back(&item);
    std::sort(items.begin(), items.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    for (const std::string* item : items)
      out << *item << '\t' << forward_.at(*item) << '\n';
  }

 private:
  void insert_reverse(const std::string& taxonomy, const std::string& item) {
    auto& bucket = reverse_[taxonomy];
    auto pos = std::lower_bound(bucket.begin(), bucket.end(), item);
    if (pos == bucket.end() || *pos != item) bucket.insert(pos, item);
  }

  void remove_reverse(const std::string& taxonomy, const std::string& item) {
    auto it = reverse_.find(taxonomy);
    if (it == reverse_.end()) return;
    auto pos = std::lower_bound(it->second.begin(), it->second.end(), item);
    if (pos != it->second.end() && *pos == item) it->second.erase(pos);
    if (it->second.empty()) reverse_.erase(it);
  }

  std::unordered_map<std::string, std::string> forward_;
  std::unordered_map<std::string, std::vector<std::string>> reverse_;
};

}  // namespace i2v
