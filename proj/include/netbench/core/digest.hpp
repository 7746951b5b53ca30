#pragma once

#include <string>
#include <string_view>

namespace netbench {

/// Lower-case hex SHA-256 of `bytes`. State digests hash a canonical,
/// order-independent serialization produced by each application.
std::string sha256_hex(std::string_view bytes);

}  // namespace netbench
