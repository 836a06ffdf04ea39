#pragma once

#include <stdexcept>
#include <string>

namespace pdn {

/// Base of every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// mesh
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct KindError : Error { using Error::Error; };
struct UnknownSetError : Error { using Error::Error; };

// refine
struct UnsupportedKindError : Error { using Error::Error; };

// fem / materials
struct MaterialError : Error { using Error::Error; };
struct InvertedElementError : Error { using Error::Error; };
struct SnapbackError : Error { using Error::Error; };

// dynamics
struct NonFiniteError : Error { using Error::Error; };

// contact
struct AmbiguousProjectionError : Error { using Error::Error; };
struct LivelockError : Error { using Error::Error; };

// coupling
struct DesyncError : Error { using Error::Error; };
struct ChannelClosedError : Error { using Error::Error; };

// scenarios / cli
struct ConfigError : Error { using Error::Error; };

} // namespace pdn
