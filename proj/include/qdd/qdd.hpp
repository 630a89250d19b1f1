#pragma once
#include "qdd/adjoint.hpp"
#include "qdd/boundary.hpp"
#include "qdd/config.hpp"
#include "qdd/cost.hpp"
#include "qdd/doping.hpp"
#include "qdd/elliptic.hpp"
#include "qdd/errors.hpp"
#include "qdd/field.hpp"
#include "qdd/geometry.hpp"
#include "qdd/io.hpp"
#include "qdd/linear_solver.hpp"
#include "qdd/mesh.hpp"
#include "qdd/operators.hpp"
#include "qdd/optimizer.hpp"
#include "qdd/solver.hpp"
#include "qdd/state.hpp"
#include "qdd/sweep.hpp"
#include "qdd/system.hpp"
