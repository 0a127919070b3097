#pragma once

#include <string_view>

namespace clca::builtin_data {

// Contents of data/ compiled into the library.
std::string_view templates_json();
std::string_view engagement_lexicon();
std::string_view value_lexicon();
std::string_view technical_lexicon();
std::string_view closing_lexicon();

}  // namespace clca::builtin_data
