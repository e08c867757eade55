//! Holds the `acceptance` test target, which checks the numbered acceptance
//! criteria end to end against the public `altprod` API.
