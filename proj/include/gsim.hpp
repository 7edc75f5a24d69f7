#pragma once

#include "gsim/amemiya.hpp"
#include "gsim/baselines.hpp"
#include "gsim/clustering.hpp"
#include "gsim/error.hpp"
#include "gsim/graph.hpp"
#include "gsim/gram.hpp"
#include "gsim/gsim.hpp"
#include "gsim/io.hpp"
#include "gsim/matrix.hpp"
#include "gsim/nfunc.hpp"
#include "gsim/selftest.hpp"
#include "gsim/special.hpp"
#include "gsim/transport.hpp"
