#include "foldscan/labels.hpp"

namespace foldscan {

std::string to_string(Label l) {
  switch (l) {
    case Label::folded: return "folded";
    case Label::normal: return "normal";
    case Label::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "folded") return Label::folded;
  if (s == "normal") return Label::normal;
  if (s == "unknown") return Label::unknown;
  return std::nullopt;
}

}  // namespace foldscan
