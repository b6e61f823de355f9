#pragma once

#include <string_view>

// Data files under data/ compiled into the library so the tools work from
// any working directory. The files remain the source of truth.
namespace regstyle::embedded {

std::string_view abbreviations();
std::string_view biber_catalog();

}  // namespace regstyle::embedded
