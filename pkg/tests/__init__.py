"""morphoneat test suite."""