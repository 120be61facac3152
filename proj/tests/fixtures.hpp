#pragma once

// Shared example programs used across the test suites.

namespace fixtures {

inline const char* kTweety = R"(
% Tweety with classical negation and defaults.
penguin(sam).
wounded_bird(john).
bird(tweety).

bird(X) :- penguin(X).
bird(X) :- wounded_bird(X).

ab(X) :- penguin(X).
ab(X) :- wounded_bird(X).

flies(X) :- bird(X), not ab(X).

-flies(X) :- ab(X).
-flies(X) :- -bird(X).

-wounded_bird(X) :- not wounded_bird(X).
-penguin(X) :- not penguin(X).
-ab(X) :- not ab(X).
-bird(X) :- not bird(X).
)";

inline const char* kQueens = R"(
% N queens over lists.
nqueens(N, Q) :-
    nqueens(N, N, [], Q).

nqueens(X, N, Qi, Qo) :-
    X > 0,
    pickqueen(X, Y, N),
    not attack(X, Y, Qi),
    X1 is X - 1,
    nqueens(X1, N, [q(X, Y) | Qi], Qo).
nqueens(0, _, Q, Q).

pickqueen(X, Y, Y) :-
    Y > 0,
    q(X, Y).
pickqueen(X, Y, N) :-
    N > 1,
    N1 is N - 1,
    pickqueen(X, Y, N1).

attack(X, _, [q(X, _) | _]).
attack(_, Y, [q(_, Y) | _]).
attack(X, Y, [q(X2, Y2) | _]) :-
    Xd is X2 - X, abs(Xd, Xd2),
    Yd is Y2 - Y, abs(Yd, Yd2),
    Xd2 = Yd2.
attack(X, Y, [_ | T]) :-
    attack(X, Y, T).

q(X, Y) :- not negq(X, Y).
negq(X, Y) :- not q(X, Y).

abs(X, X) :- X >= 0.
abs(X, Y) :- X < 0, Y is X * -1.
)";

inline const char* kHamiltonian = R"(
% Hamiltonian cycle detection with a fixed graph.
reachable(V) :- chosen(U, V), reachable(U).
reachable(0) :- chosen(V, 0).

:- vertex(U), not reachable(U).

other(U, V) :-
    vertex(U), vertex(V), vertex(W),
    V \= W, chosen(U, W).
chosen(U, V) :-
    vertex(U), vertex(V),
    edge(U, V), not other(U, V).

:- chosen(U, W), chosen(V, W), U \= V.

vertex(0).
vertex(1).
vertex(2).
vertex(3).
vertex(4).

edge(0, 1).
edge(1, 2).
edge(2, 3).
edge(3, 4).
edge(4, 0).
edge(4, 1).
edge(4, 2).
edge(4, 3).
)";

}  // namespace fixtures
