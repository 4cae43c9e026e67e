#pragma once

namespace kg::detail {

// Contents of data/instruction_patterns.json, generated at configure time.
extern const char* const kInstructionPatternsJson;

} // namespace kg::detail
