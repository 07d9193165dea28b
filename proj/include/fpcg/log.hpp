#pragma once

#include <functional>
#include <string>

namespace fpcg {

using WarningSink = std::function<void(const std::string&)>;

/// Non-fatal diagnostics (band clamping, unknown INI keys, ...). The default
/// sink writes "warning: <msg>" to stderr. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace fpcg
