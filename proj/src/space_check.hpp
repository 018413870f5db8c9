#pragma once

#include <string_view>
#include <vector>

#include "aconf/paramspace.hpp"

namespace aconf::detail {

// Source line of each declaration, so structural errors can point at the PCS text.
struct SourceLines {
  std::vector<int> params;
  std::vector<int> conditions;
  std::vector<int> forbidden;
};

void check_space(const std::vector<ParameterSpec>& params, const std::vector<ConditionClause>& conditions,
                 const std::vector<ForbiddenClause>& forbidden, const SourceLines* lines);

bool valid_name(std::string_view name);

}  // namespace aconf::detail
