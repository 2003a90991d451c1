#pragma once

#include <string>

#include "egonet/errors.hpp"
#include "egonet/vec3.hpp"
#include "json.hpp"

namespace egonet {

inline nlohmann::json vec_to_json(const Vec3& v) { return {v.x, v.y, v.z}; }

inline Vec3 vec_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("expected a 3-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline nlohmann::json quat_to_json(const Quat& q) { return {q.w, q.x, q.y, q.z}; }

inline Quat quat_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw InputError("expected a quaternion [w,x,y,z], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

// Runs a JSON decoding step, turning library exceptions into InputError.
template <typename F>
auto decode(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed " + what + ": " + e.what());
  }
}

}  // namespace egonet
