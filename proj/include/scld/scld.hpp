#pragma once

#include "scld/error.hpp"
#include "scld/fol.hpp"
#include "scld/cnf.hpp"
#include "scld/counter.hpp"
#include "scld/semantics.hpp"
#include "scld/codec.hpp"
#include "scld/encoder.hpp"
#include "scld/simnet.hpp"
#include "scld/story.hpp"
#include "scld/experiment.hpp"
