#pragma once

#include "baseline.hpp"
#include "bridge.hpp"
#include "core.hpp"
#include "eval.hpp"
#include "io_bundle.hpp"
#include "kernel.hpp"
#include "krr.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "prior.hpp"
#include "search.hpp"
#include "synthetic.hpp"
#include "transform.hpp"
