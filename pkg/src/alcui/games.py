"""Max-parity games solved by the recursive attractor algorithm."""
from __future__ import annotations

from typing import Dict, Hashable, List, Set, Tuple


class ParityGame:
    """Finite game graph; player 0 wins a play iff the highest priority seen infinitely often is even.

    Every position must have at least one successor.
    """

    def __init__(self):
        self.owner: Dict[Hashable, int] = {}
        self.prio: Dict[Hashable, int] = {}
        self.succ: Dict[Hashable, List[Hashable]] = {}
        self.pred: Dict[Hashable, List[Hashable]] = {}

    def add(self, v, owner: int, prio: int):
        self.owner[v] = owner
        self.prio[v] = prio
        self.succ.setdefault(v, [])
        self.pred.setdefault(v, [])

    def edge(self, u, v):
        self.succ[u].append(v)
        self.pred[v].append(u)

    def __len__(self):
        return len(self.owner)


def attractor(game: ParityGame, target: Set, player: int, arena: Set) -> Set:
    attr = set(target)
    # out-degree inside the arena for opponent positions
    count = {}
    queue = list(attr)
    while queue:
        v = queue.pop()
        for u in game.pred[v]:
            if u not in arena or u in attr:
                continue
            if game.owner[u] == player:
                attr.add(u)
                queue.append(u)
            else:
                if u not in count:
                    count[u] = sum(1 for w in game.succ[u] if w in arena)
                count[u] -= 1
                if count[u] == 0:
                    attr.add(u)
                    queue.append(u)
    return attr


def solve(game: ParityGame, arena: Set = None) -> Tuple[Set, Set]:
    """Winning regions (W0, W1) of the subgame induced by `arena`."""
    arena = set(game.owner) if arena is None else set(arena)
    won = [set(), set()]
    while arena:
        top = max(game.prio[v] for v in arena)
        player = top % 2
        tops = {v for v in arena if game.prio[v] == top}
        a = attractor(game, tops, player, arena)
        w = solve(game, arena - a)
        if not w[1 - player]:
            won[player] |= arena
            break
        # a region the opponent wins, closed under its attractor, is won in the whole game
        b = attractor(game, w[1 - player], 1 - player, arena)
        won[1 - player] |= b
        arena = arena - b
    return won[0], won[1]
