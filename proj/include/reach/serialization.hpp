#ifndef REACH_SERIALIZATION_HPP_
#define REACH_SERIALIZATION_HPP_

#include <json.hpp>

#include "reach/backward.hpp"
#include "reach/conzono.hpp"
#include "reach/interval.hpp"
#include "reach/polytope.hpp"
#include "reach/zonotope.hpp"

namespace reach {

// Matrices serialize as row-major arrays of rows; no implicit broadcasting.
using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

Json to_json(const Interval& iv);
Json to_json(const IntervalMatrix& im);
Json to_json(const Zonotope& z);
Json to_json(const ConstrainedZonotope& cz);
Json to_json(const HPolytope& p);
Json to_json(const Ball& b);

Interval interval_from_json(const Json& j);
IntervalMatrix interval_matrix_from_json(const Json& j);
Zonotope zonotope_from_json(const Json& j);
ConstrainedZonotope conzono_from_json(const Json& j);
HPolytope hpolytope_from_json(const Json& j);
Ball ball_from_json(const Json& j);

Json to_json(const TimePointResult& res);
Json to_json(const TimeIntervalResult& res);

} // namespace reach

#endif // REACH_SERIALIZATION_HPP_
