#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace foldscan {

// Positive class is folded.
enum class Label { folded, normal, unknown };

std::string to_string(Label l);
std::optional<Label> parse_label(std::string_view s);

}  // namespace foldscan
