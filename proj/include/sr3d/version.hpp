#ifndef SR3D_VERSION_HPP_
#define SR3D_VERSION_HPP_

namespace sr3d {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace sr3d

#endif  // SR3D_VERSION_HPP_
