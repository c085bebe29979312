#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "i2v/errors.hpp"

namespace i2v {

// The four ways a user can engage with an item, totally ordered by purchase
// intent: purchase > add-to-cart > favorite > view. The enum value is the
// rank in that order.
enum class InteractionType : std::uint8_t {
  View = 0,
  Favorite = 1,
  AddToCart = 2,
  Purchase = 3,
};

inline constexpr int kInteractionCount = 4;

inline constexpr InteractionType kAllInteractions[kInteractionCount] = {
    InteractionType::View,
    InteractionType::Favorite,
    InteractionType::AddToCart,
    InteractionType::Purchase,
};

constexpr int interaction_rank(InteractionType t) {
  return static_cast<int>(t);
}

constexpr std::string_view to_string(InteractionType t) {
  switch (t) {
    case InteractionType::View: return "view";
    case InteractionType::Favorite: return "favorite";
    case InteractionType::AddToCart: return "cart";
    case InteractionType::Purchase: return "purchase";
  }
  return "?";
}

inline std::optional<InteractionType> parse_interaction(std::string_view s) {
  if (s == "view") return InteractionType::View;
  if (s == "favorite") return InteractionType::Favorite;
  if (s == "cart") return InteractionType::AddToCart;
  if (s == "purchase") return InteractionType::Purchase;
  return std::nullopt;
}

// The vocabulary unit: an item id fused with an interaction kind.
// Canonical text form is "<item>|<interaction>".
struct PairToken {
  std::string item;
  InteractionType interaction = InteractionType::View;

  PairToken() = default;
  PairToken(std::string item_id, InteractionType kind)
      : item(std::move(item_id)), interaction(kind) {}

  std::string canonical() const {
    std::string s;
    s.reserve(item.size() + 9);
    s += item;
    s += '|';
    s += to_string(interaction);
    return s;
  }

  // Strict parse: exactly one '|', non-empty item, known interaction name.
  static std::optional<PairToken> parse(std::string_view text) {
    const auto sep = text.find('|');
    if (sep == std::string_view::npos || sep == 0) return std::nullopt;
    if (text.find('|', sep + 1) != std::string_view::npos) return std::nullopt;
    const auto kind = parse_interaction(text.substr(sep + 1));
    if (!kind) return std::nullopt;
    return PairToken(std::string(text.substr(0, sep)), *kind);
  }

  friend bool operator==(const PairToken& a, const PairToken& b) {
    return a.interaction == b.interaction && a.item == b.item;
  }
  friend bool operator!=(const PairToken& a, const PairToken& b) {
    return !(a == b);
  }
  // Lexicographic on (item, interaction); used for deterministic ordering.
  friend bool operator<(const PairToken& a, const PairToken& b) {
    if (a.item != b.item) return a.item < b.item;
    return interaction_rank(a.interaction) < interaction_rank(b.interaction);
  }
};

struct PairTokenHash {
  std::size_t operator()(const PairToken& t) const {
    std::size_t h = std::hash<std::string>{}(t.item);
    return h ^ (static_cast<std::size_t>(t.interaction) + 0x9e3779b9 + (h << 6) +
                (h >> 2));
  }
};

// One user visit: a chronological sequence of item-interaction pairs.
struct Session {
  std::string id;
  std::vector<PairToken> events;
};

}  // namespace i2v
