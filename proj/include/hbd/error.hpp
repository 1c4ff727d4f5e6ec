/*
   Copyright 2026 The hbdlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace hbd {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unit normal undefined because the leaf is (numerically) null at the point.
class NullLeafPoint : public Error {
public:
    NullLeafPoint(const std::string& what, double m0, double m1)
        : Error(what), m_cov{m0, m1} {}
    double m_cov[2];
};

class NoMatch : public Error {
public:
    using Error::Error;
};

class DegenerateMode : public Error {
public:
    using Error::Error;
};

class ArityMismatch : public Error {
public:
    using Error::Error;
};

class BadQuadrature : public Error {
public:
    using Error::Error;
};

// Wave-function node: |m.j| below the configured threshold.
class NodeError : public Error {
public:
    NodeError(const std::string& what, double t) : Error(what), t(t) {}
    double t;
};

class RankError : public Error {
public:
    using Error::Error;
};

class EnvelopeError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

} // namespace hbd
