// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace ndslab
{

// Entry point of the nds-lab command line. Returns 0 on success, 2 on usage
// or configuration errors and 1 on runtime failures.
int cli_dispatch(int argc, char const* const* argv, std::ostream& out,
                 std::ostream& err);

}  // namespace ndslab
