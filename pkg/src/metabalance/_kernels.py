"""Flat-array game kernels: the simulator's hot path.

A game state is a single ``int32[STATE_SIZE]`` vector (two player blocks plus
three globals), and the card pool is an ``int32[n, 9]`` table. Everything a
playout needs - dealing, legal-move enumeration, action application, the
one-turn best-sequence search, and whole-game batches - operates on these
arrays so the loops compile to machine code (see ``jitcfg``).

Layout of a player block (base = side * P_SIZE):

    +0  hero hp            +4  weapon attack      +8   next deck index
    +1  mana crystals      +5  weapon durability  +9.. deck order (30)
    +2  mana available     +6  hero attacked flag
    +3  fatigue counter    +7  hero power used flag
    +39 hand count, +40.. hand (10)
    +50 board count, +51.. board (7 entries x 8 fields)
    +107 drawn mask  +108 played mask   (bit per unique deck card)
    +109 hero class  +110 graveyard count  +111 burned count

Globals: turn number, active player, outcome. Masks use one bit per unique
card of that player's deck (compact telemetry for win-rate-when-drawn/played).
"""

import numpy as np

from .jitcfg import kernel

# ---------------------------------------------------------------------------
# layout constants
# ---------------------------------------------------------------------------

P_HP = 0
P_CRYST = 1
P_MANA = 2
P_FATIGUE = 3
P_WATK = 4
P_WDUR = 5
P_HERO_ATTACKED = 6
P_POWER_USED = 7
P_DECKPOS = 8
P_DECK = 9          # 30 slots
P_HANDN = 39
P_HAND = 40         # 10 slots
P_BOARDN = 50
P_BOARD = 51        # 7 entries x 8 fields
P_DRAWN = 107
P_PLAYED = 108
P_CLASS = 109
P_GRAVE = 110
P_BURNED = 111
P_SIZE = 112

G_TURN = 224
G_ACTIVE = 225
G_OUTCOME = 226
STATE_SIZE = 227

DECK_SIZE = 30
HAND_LIMIT = 10
BOARD_LIMIT = 7
HERO_HP = 30
MANA_CAP = 10
TURN_CAP = 100

# board entry fields
B_CARD = 0
B_ATK = 1
B_HP = 2
B_MAX = 3
B_TAUNT = 4
B_CHARGE = 5
B_NATK = 6
B_SICK = 7
B_FIELDS = 8

TOKEN_CARD = -2     # board entry summoned by a hero power, not a pool card

# card table columns
C_TYPE = 0          # 0 minion, 1 spell, 2 weapon
C_COST = 1
C_ATK = 2
C_HP = 3            # health for minions, durability for weapons
C_TAUNT = 4
C_CHARGE = 5
C_SKIND = 6         # -1 none, else effect kind
C_SX = 7
C_SY = 8
CARDTAB_COLS = 9

TYPE_MINION = 0
TYPE_SPELL = 1
TYPE_WEAPON = 2

EFFECT_DAMAGE_TARGET = 0
EFFECT_DAMAGE_ALL_ENEMY_MINIONS = 1
EFFECT_DAMAGE_ENEMY_HERO = 2
EFFECT_HEAL = 3
EFFECT_DRAW_CARDS = 4
EFFECT_BUFF_MINION = 5

CLASS_HUNTER = 0
CLASS_PALADIN = 1
CLASS_WARLOCK = 2

# action kinds (enumeration order is the deterministic tie-break order)
A_PLAY_MINION = 0
A_PLAY_SPELL = 1
A_PLAY_WEAPON = 2
A_MINION_ATTACK = 3
A_HERO_ATTACK = 4
A_HERO_POWER = 5
A_END_TURN = 6

# target codes: 0..6 own board slot, 10..16 enemy board slot, 20 enemy hero
T_ENEMY_BASE = 10
T_ENEMY_HERO = 20
T_NONE = -1

OUTCOME_IN_PROGRESS = 0
OUTCOME_P1_WIN = 1
OUTCOME_P2_WIN = 2
OUTCOME_DRAW = 3

MAX_ACTIONS = 224   # generous bound on one state's legal actions
MAX_SEQ = 64        # bound on actions in a single turn

HERO_POWER_COST = 2

# weight vector slots for the evaluation heuristic
W_ENEMY_HERO_DAMAGE = 0
W_OWN_BOARD_ATTACK = 1
W_OWN_BOARD_HEALTH = 2
W_ENEMY_BOARD_ATTACK = 3
W_ENEMY_BOARD_HEALTH = 4
W_OWN_HERO_HP = 5
W_CARD_ADVANTAGE = 6
W_LETHAL_BONUS = 7
N_WEIGHTS = 8

_U1 = np.uint64(0x9E3779B97F4A7C15)
_U2 = np.uint64(0xBF58476D1CE4E5B9)
_U3 = np.uint64(0x94D049BB133111EB)
_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)


# ---------------------------------------------------------------------------
# deterministic rng / hashing (identical compiled and uncompiled)
# ---------------------------------------------------------------------------

def _mix64(z):
    z = z + _U1
    z = (z ^ (z >> np.uint64(30))) * _U2
    z = (z ^ (z >> np.uint64(27))) * _U3
    return z ^ (z >> np.uint64(31))


def _rand_u64(seed, ctr):
    return _mix64(seed + np.uint64(ctr) * _U1)


def _rand_below(seed, ctr, n):
    return np.int64(_rand_u64(seed, ctr) % np.uint64(n))


def _hval(x):
    # state entries are small signed ints; offset keeps the cast in range
    return np.uint64(x + 64)


def _fnv(h, v):
    return (h ^ v) * _FNV_PRIME


def _exact_hash(state):
    """Order-sensitive hash of the full state vector (replay identity)."""
    h = _FNV_OFFSET
    for i in range(STATE_SIZE):
        h = _fnv(h, _hval(state[i]))
    return h


def _turn_hash(state):
    """Hash for transposition pruning inside a single turn's search.

    Invariant to hand and board ordering: hands are multisets and board
    position has no mechanical meaning, so permutations of either are the
    same state for search purposes. Deck content is represented only by the
    draw position, which is sound within one turn because every node shares
    the same shuffled deck order.
    """
    h = _FNV_OFFSET
    for side in range(2):
        b = side * P_SIZE
        for k in range(P_DECKPOS + 1):
            h = _fnv(h, _hval(state[b + k]))
        hand_acc = np.uint64(0)
        for i in range(state[b + P_HANDN]):
            hand_acc = hand_acc + _mix64(_hval(state[b + P_HAND + i]))
        h = _fnv(h, hand_acc)
        board_acc = np.uint64(0)
        for m in range(state[b + P_BOARDN]):
            e = b + P_BOARD + m * B_FIELDS
            mh = _FNV_OFFSET
            for f in range(B_FIELDS):
                mh = _fnv(mh, _hval(state[e + f]))
            board_acc = board_acc + _mix64(mh)
        h = _fnv(h, board_acc)
        h = _fnv(h, _hval(state[b + P_DRAWN]))
        h = _fnv(h, _hval(state[b + P_PLAYED]))
        h = _fnv(h, _hval(state[b + P_CLASS]))
        h = _fnv(h, _hval(state[b + P_GRAVE]))
        h = _fnv(h, _hval(state[b + P_BURNED]))
    h = _fnv(h, _hval(state[G_TURN]))
    h = _fnv(h, _hval(state[G_ACTIVE]))
    h = _fnv(h, _hval(state[G_OUTCOME]))
    return h


# ---------------------------------------------------------------------------
# game setup and primitive steps
# ---------------------------------------------------------------------------

def _draw_one(state, ubits, side):
    base = side * P_SIZE
    pos = state[base + P_DECKPOS]
    if pos < DECK_SIZE:
        card = state[base + P_DECK + pos]
        state[base + P_DECKPOS] = pos + 1
        if state[base + P_HANDN] < HAND_LIMIT:
            state[base + P_HAND + state[base + P_HANDN]] = card
            state[base + P_HANDN] += 1
            u = ubits[side, card]
            if u >= 0:
                state[base + P_DRAWN] |= 1 << u
        else:
            state[base + P_BURNED] += 1
    else:
        state[base + P_FATIGUE] += 1
        state[base + P_HP] -= state[base + P_FATIGUE]


def _shuffle_deck(state, side, seed):
    base = side * P_SIZE + P_DECK
    stream = _mix64(seed ^ np.uint64(side + 1))
    for i in range(DECK_SIZE - 1, 0, -1):
        j = _rand_below(stream, i, i + 1)
        tmp = state[base + i]
        state[base + i] = state[base + j]
        state[base + j] = tmp


def _check_outcome(state):
    if state[G_OUTCOME] != OUTCOME_IN_PROGRESS:
        return
    dead1 = state[P_HP] <= 0
    dead2 = state[P_SIZE + P_HP] <= 0
    if dead1 and dead2:
        state[G_OUTCOME] = OUTCOME_DRAW
    elif dead1:
        state[G_OUTCOME] = OUTCOME_P2_WIN
    elif dead2:
        state[G_OUTCOME] = OUTCOME_P1_WIN


def _new_game(state, deck1, deck2, cls1, cls2, ubits, seed):
    for i in range(STATE_SIZE):
        state[i] = 0
    for side in range(2):
        base = side * P_SIZE
        state[base + P_HP] = HERO_HP
        for i in range(DECK_SIZE):
            state[base + P_DECK + i] = deck1[i] if side == 0 else deck2[i]
        _shuffle_deck(state, side, seed)
    state[P_CLASS] = cls1
    state[P_SIZE + P_CLASS] = cls2
    # going second is compensated with a bigger opening hand
    for _ in range(3):
        _draw_one(state, ubits, 0)
    for _ in range(4):
        _draw_one(state, ubits, 1)
    state[P_CRYST] = 1
    state[P_MANA] = 1
    state[G_TURN] = 1
    state[G_ACTIVE] = 0
    state[G_OUTCOME] = OUTCOME_IN_PROGRESS


def _sweep_dead(state):
    for side in range(2):
        base = side * P_SIZE
        n = state[base + P_BOARDN]
        keep = 0
        for m in range(n):
            e = base + P_BOARD + m * B_FIELDS
            if state[e + B_HP] >= 1:
                if keep != m:
                    d = base + P_BOARD + keep * B_FIELDS
                    for f in range(B_FIELDS):
                        state[d + f] = state[e + f]
                keep += 1
            elif state[e + B_CARD] >= 0:
                state[base + P_GRAVE] += 1
        state[base + P_BOARDN] = keep


def _remove_hand(state, base, idx):
    card = state[base + P_HAND + idx]
    n = state[base + P_HANDN]
    for j in range(idx, n - 1):
        state[base + P_HAND + j] = state[base + P_HAND + j + 1]
    state[base + P_HANDN] = n - 1
    return card


def _mark_played(state, ubits, side, card):
    u = ubits[side, card]
    if u >= 0:
        state[side * P_SIZE + P_PLAYED] |= 1 << u


def _begin_turn(state, ubits, side):
    base = side * P_SIZE
    if state[base + P_CRYST] < MANA_CAP:
        state[base + P_CRYST] += 1
    state[base + P_MANA] = state[base + P_CRYST]
    state[base + P_HERO_ATTACKED] = 0
    state[base + P_POWER_USED] = 0
    for m in range(state[base + P_BOARDN]):
        e = base + P_BOARD + m * B_FIELDS
        state[e + B_SICK] = 0
        state[e + B_NATK] = 1
    _draw_one(state, ubits, side)


def _apply_move(state, cardtab, ubits, kind, a, b):
    """Apply one legal action in place; sets the outcome when a hero dies."""
    active = state[G_ACTIVE]
    me = active * P_SIZE
    opp = (1 - active) * P_SIZE

    if kind == A_END_TURN:
        if state[G_TURN] >= TURN_CAP:
            state[G_OUTCOME] = OUTCOME_DRAW
            return
        state[G_TURN] += 1
        state[G_ACTIVE] = 1 - active
        _begin_turn(state, ubits, 1 - active)
        _check_outcome(state)
        return

    if kind == A_PLAY_MINION:
        card = _remove_hand(state, me, a)
        state[me + P_MANA] -= cardtab[card, C_COST]
        _mark_played(state, ubits, active, card)
        e = me + P_BOARD + state[me + P_BOARDN] * B_FIELDS
        state[e + B_CARD] = card
        state[e + B_ATK] = cardtab[card, C_ATK]
        state[e + B_HP] = cardtab[card, C_HP]
        state[e + B_MAX] = cardtab[card, C_HP]
        state[e + B_TAUNT] = cardtab[card, C_TAUNT]
        state[e + B_CHARGE] = cardtab[card, C_CHARGE]
        state[e + B_NATK] = 1
        state[e + B_SICK] = 1
        state[me + P_BOARDN] += 1

    elif kind == A_PLAY_SPELL:
        card = _remove_hand(state, me, a)
        state[me + P_MANA] -= cardtab[card, C_COST]
        _mark_played(state, ubits, active, card)
        state[me + P_GRAVE] += 1
        skind = cardtab[card, C_SKIND]
        x = cardtab[card, C_SX]
        y = cardtab[card, C_SY]
        if skind == EFFECT_DAMAGE_TARGET:
            if b == T_ENEMY_HERO:
                state[opp + P_HP] -= x
            elif b >= T_ENEMY_BASE:
                state[opp + P_BOARD + (b - T_ENEMY_BASE) * B_FIELDS + B_HP] -= x
            else:
                state[me + P_BOARD + b * B_FIELDS + B_HP] -= x
        elif skind == EFFECT_DAMAGE_ALL_ENEMY_MINIONS:
            for m in range(state[opp + P_BOARDN]):
                state[opp + P_BOARD + m * B_FIELDS + B_HP] -= x
        elif skind == EFFECT_DAMAGE_ENEMY_HERO:
            state[opp + P_HP] -= x
        elif skind == EFFECT_HEAL:
            hp = state[me + P_HP] + x
            state[me + P_HP] = HERO_HP if hp > HERO_HP else hp
        elif skind == EFFECT_DRAW_CARDS:
            for _ in range(x):
                _draw_one(state, ubits, active)
        elif skind == EFFECT_BUFF_MINION:
            e = me + P_BOARD + b * B_FIELDS
            state[e + B_ATK] += x
            state[e + B_HP] += y
            state[e + B_MAX] += y
        _sweep_dead(state)

    elif kind == A_PLAY_WEAPON:
        card = _remove_hand(state, me, a)
        state[me + P_MANA] -= cardtab[card, C_COST]
        _mark_played(state, ubits, active, card)
        if state[me + P_WDUR] > 0:
            state[me + P_GRAVE] += 1
        state[me + P_WATK] = cardtab[card, C_ATK]
        state[me + P_WDUR] = cardtab[card, C_HP]

    elif kind == A_MINION_ATTACK:
        e = me + P_BOARD + a * B_FIELDS
        atk = state[e + B_ATK]
        if b == T_ENEMY_HERO:
            state[opp + P_HP] -= atk
        else:
            t = opp + P_BOARD + (b - T_ENEMY_BASE) * B_FIELDS
            # combat is simultaneous: snapshot the defender's attack first
            datk = state[t + B_ATK]
            state[t + B_HP] -= atk
            state[e + B_HP] -= datk
        state[e + B_NATK] -= 1
        _sweep_dead(state)

    elif kind == A_HERO_ATTACK:
        watk = state[me + P_WATK]
        if b == T_ENEMY_HERO:
            state[opp + P_HP] -= watk
        else:
            t = opp + P_BOARD + (b - T_ENEMY_BASE) * B_FIELDS
            datk = state[t + B_ATK]
            state[t + B_HP] -= watk
            state[me + P_HP] -= datk
        state[me + P_WDUR] -= 1
        if state[me + P_WDUR] == 0:
            state[me + P_WATK] = 0
            state[me + P_GRAVE] += 1
        state[me + P_HERO_ATTACKED] = 1
        _sweep_dead(state)

    elif kind == A_HERO_POWER:
        state[me + P_MANA] -= HERO_POWER_COST
        state[me + P_POWER_USED] = 1
        cls = state[me + P_CLASS]
        if cls == CLASS_HUNTER:
            state[opp + P_HP] -= 2
        elif cls == CLASS_WARLOCK:
            state[me + P_HP] -= 2
            _draw_one(state, ubits, active)
        else:
            e = me + P_BOARD + state[me + P_BOARDN] * B_FIELDS
            state[e + B_CARD] = TOKEN_CARD
            state[e + B_ATK] = 1
            state[e + B_HP] = 1
            state[e + B_MAX] = 1
            state[e + B_TAUNT] = 0
            state[e + B_CHARGE] = 0
            state[e + B_NATK] = 1
            state[e + B_SICK] = 1
            state[me + P_BOARDN] += 1

    _check_outcome(state)


def _has_taunt(state, opp):
    for m in range(state[opp + P_BOARDN]):
        if state[opp + P_BOARD + m * B_FIELDS + B_TAUNT] == 1:
            return True
    return False


def _legal_moves(state, cardtab, out):
    """Enumerate legal actions into ``out`` (kind, a, b); returns the count.

    Enumeration order is fixed (play, attack, power, end turn; ascending
    indices) so searches and tie-breaks are deterministic.
    """
    if state[G_OUTCOME] != OUTCOME_IN_PROGRESS:
        return 0
    active = state[G_ACTIVE]
    me = active * P_SIZE
    opp = (1 - active) * P_SIZE
    mana = state[me + P_MANA]
    n = 0

    for h in range(state[me + P_HANDN]):
        card = state[me + P_HAND + h]
        if cardtab[card, C_COST] > mana:
            continue
        ctype = cardtab[card, C_TYPE]
        if ctype == TYPE_MINION:
            if state[me + P_BOARDN] < BOARD_LIMIT:
                out[n, 0] = A_PLAY_MINION
                out[n, 1] = h
                out[n, 2] = T_NONE
                n += 1
        elif ctype == TYPE_WEAPON:
            out[n, 0] = A_PLAY_WEAPON
            out[n, 1] = h
            out[n, 2] = T_NONE
            n += 1
        else:
            skind = cardtab[card, C_SKIND]
            if skind == EFFECT_DAMAGE_TARGET:
                for m in range(state[me + P_BOARDN]):
                    out[n, 0] = A_PLAY_SPELL
                    out[n, 1] = h
                    out[n, 2] = m
                    n += 1
                for m in range(state[opp + P_BOARDN]):
                    out[n, 0] = A_PLAY_SPELL
                    out[n, 1] = h
                    out[n, 2] = T_ENEMY_BASE + m
                    n += 1
                out[n, 0] = A_PLAY_SPELL
                out[n, 1] = h
                out[n, 2] = T_ENEMY_HERO
                n += 1
            elif skind == EFFECT_BUFF_MINION:
                for m in range(state[me + P_BOARDN]):
                    out[n, 0] = A_PLAY_SPELL
                    out[n, 1] = h
                    out[n, 2] = m
                    n += 1
            else:
                out[n, 0] = A_PLAY_SPELL
                out[n, 1] = h
                out[n, 2] = T_NONE
                n += 1

    taunt = _has_taunt(state, opp)
    for m in range(state[me + P_BOARDN]):
        e = me + P_BOARD + m * B_FIELDS
        if state[e + B_ATK] < 1 or state[e + B_NATK] < 1:
            continue
        if state[e + B_SICK] == 1 and state[e + B_CHARGE] == 0:
            continue
        for t in range(state[opp + P_BOARDN]):
            if taunt and state[opp + P_BOARD + t * B_FIELDS + B_TAUNT] != 1:
                continue
            out[n, 0] = A_MINION_ATTACK
            out[n, 1] = m
            out[n, 2] = T_ENEMY_BASE + t
            n += 1
        if not taunt:
            out[n, 0] = A_MINION_ATTACK
            out[n, 1] = m
            out[n, 2] = T_ENEMY_HERO
            n += 1

    if state[me + P_WDUR] > 0 and state[me + P_WATK] > 0 and state[me + P_HERO_ATTACKED] == 0:
        for t in range(state[opp + P_BOARDN]):
            if taunt and state[opp + P_BOARD + t * B_FIELDS + B_TAUNT] != 1:
                continue
            out[n, 0] = A_HERO_ATTACK
            out[n, 1] = T_NONE
            out[n, 2] = T_ENEMY_BASE + t
            n += 1
        if not taunt:
            out[n, 0] = A_HERO_ATTACK
            out[n, 1] = T_NONE
            out[n, 2] = T_ENEMY_HERO
            n += 1

    if mana >= HERO_POWER_COST and state[me + P_POWER_USED] == 0:
        if state[me + P_CLASS] != CLASS_PALADIN or state[me + P_BOARDN] < BOARD_LIMIT:
            out[n, 0] = A_HERO_POWER
            out[n, 1] = T_NONE
            out[n, 2] = T_NONE
            n += 1

    out[n, 0] = A_END_TURN
    out[n, 1] = T_NONE
    out[n, 2] = T_NONE
    n += 1
    return n


# ---------------------------------------------------------------------------
# state evaluation
# ---------------------------------------------------------------------------

def _raw_score(state, side, wvec):
    me = side * P_SIZE
    opp = (1 - side) * P_SIZE
    own_atk = np.float64(state[me + P_WATK] * state[me + P_WDUR])
    own_hp = np.float64(0.0)
    for m in range(state[me + P_BOARDN]):
        e = me + P_BOARD + m * B_FIELDS
        own_atk += state[e + B_ATK]
        own_hp += state[e + B_HP]
    enemy_atk = np.float64(state[opp + P_WATK] * state[opp + P_WDUR])
    enemy_hp = np.float64(0.0)
    for m in range(state[opp + P_BOARDN]):
        e = opp + P_BOARD + m * B_FIELDS
        enemy_atk += state[e + B_ATK]
        enemy_hp += state[e + B_HP]
    return (wvec[W_ENEMY_HERO_DAMAGE] * (HERO_HP - state[opp + P_HP])
            + wvec[W_OWN_BOARD_ATTACK] * own_atk
            + wvec[W_OWN_BOARD_HEALTH] * own_hp
            + wvec[W_ENEMY_BOARD_ATTACK] * enemy_atk
            + wvec[W_ENEMY_BOARD_HEALTH] * enemy_hp
            + wvec[W_OWN_HERO_HP] * state[me + P_HP]
            + wvec[W_CARD_ADVANTAGE] * state[me + P_HANDN])


def _eval_state(state, persp, wvec):
    """Score a state for ``persp``: my reading minus the opponent's reading.

    The difference form makes the score zero-sum for any weight vector, so
    mirror-symmetric states score zero from both seats.
    """
    outcome = state[G_OUTCOME]
    if outcome != OUTCOME_IN_PROGRESS:
        if outcome == OUTCOME_DRAW:
            return np.float64(0.0)
        won = (outcome == OUTCOME_P1_WIN) == (persp == 0)
        return wvec[W_LETHAL_BONUS] if won else -wvec[W_LETHAL_BONUS]
    return _raw_score(state, persp, wvec) - _raw_score(state, 1 - persp, wvec)


# ---------------------------------------------------------------------------
# one-turn best-sequence search
# ---------------------------------------------------------------------------

def _path_less(i, j, parents, acts):
    """True if node i's full turn sequence precedes node j's lexicographically.

    Sequences end in END_TURN (the largest action kind), so when one raw
    path is a prefix of the other the longer one compares smaller.
    """
    buf_a = np.empty((MAX_SEQ, 3), dtype=np.int32)
    buf_b = np.empty((MAX_SEQ, 3), dtype=np.int32)
    na = 0
    k = i
    while k > 0:
        buf_a[na, 0] = acts[k, 0]
        buf_a[na, 1] = acts[k, 1]
        buf_a[na, 2] = acts[k, 2]
        na += 1
        k = parents[k]
    nb = 0
    k = j
    while k > 0:
        buf_b[nb, 0] = acts[k, 0]
        buf_b[nb, 1] = acts[k, 1]
        buf_b[nb, 2] = acts[k, 2]
        nb += 1
        k = parents[k]
    # paths were collected leaf-to-root; compare from the root end
    steps = na if na < nb else nb
    for s in range(steps):
        ea = na - 1 - s
        eb = nb - 1 - s
        for f in range(3):
            if buf_a[ea, f] != buf_b[eb, f]:
                return buf_a[ea, f] < buf_b[eb, f]
    return na > nb


def _search_turn(state, cardtab, ubits, wvec, budget,
                 nodes, scores, parents, acts, depths,
                 movebuf, htab_key, htab_epoch, epoch,
                 path_out):
    """Breadth-first search over this turn's action sequences.

    Explores up to ``budget`` distinct states (transpositions collapsed via
    canonical hashing), scores each as a turn-end candidate, and writes the
    best path (ties broken lexicographically) plus END_TURN into
    ``path_out``. Returns (path length, best node index); the input state is
    left untouched.
    """
    hsize = htab_key.shape[0]
    hmask = hsize - 1
    active = state[G_ACTIVE]

    for i in range(STATE_SIZE):
        nodes[0, i] = state[i]
    parents[0] = -1
    depths[0] = 0
    scores[0] = _eval_state(state, active, wvec)
    count = 1
    best = 0

    h0 = _turn_hash(state)
    slot = np.int64(h0 & np.uint64(hmask))
    htab_key[slot] = h0
    htab_epoch[slot] = epoch

    i = 0
    while i < count and count < budget:
        if nodes[i, G_OUTCOME] == OUTCOME_IN_PROGRESS and depths[i] < MAX_SEQ - 2:
            nmoves = _legal_moves(nodes[i], cardtab, movebuf)
            for mv in range(nmoves):
                kind = movebuf[mv, 0]
                if kind == A_END_TURN:
                    continue
                for s in range(STATE_SIZE):
                    nodes[count, s] = nodes[i, s]
                _apply_move(nodes[count], cardtab, ubits,
                            kind, movebuf[mv, 1], movebuf[mv, 2])
                h = _turn_hash(nodes[count])
                slot = np.int64(h & np.uint64(hmask))
                dup = False
                while htab_epoch[slot] == epoch:
                    if htab_key[slot] == h:
                        dup = True
                        break
                    slot = (slot + 1) & hmask
                if dup:
                    continue
                htab_key[slot] = h
                htab_epoch[slot] = epoch
                parents[count] = i
                acts[count, 0] = kind
                acts[count, 1] = movebuf[mv, 1]
                acts[count, 2] = movebuf[mv, 2]
                depths[count] = depths[i] + 1
                sc = _eval_state(nodes[count], active, wvec)
                scores[count] = sc
                if sc > scores[best]:
                    best = count
                elif sc == scores[best] and best != count:
                    if _path_less(count, best, parents, acts):
                        best = count
                count += 1
                if count >= budget:
                    break
        i += 1

    # reconstruct the winning path root-first, then end the turn
    n = depths[best]
    k = best
    s = n - 1
    while k > 0:
        path_out[s, 0] = acts[k, 0]
        path_out[s, 1] = acts[k, 1]
        path_out[s, 2] = acts[k, 2]
        k = parents[k]
        s -= 1
    path_out[n, 0] = A_END_TURN
    path_out[n, 1] = T_NONE
    path_out[n, 2] = T_NONE
    return n + 1, best


# ---------------------------------------------------------------------------
# whole games and batches
# ---------------------------------------------------------------------------

def _play_game(state, cardtab, deck1, deck2, cls1, cls2, ubits,
               wvec1, wvec2, budget1, budget2, seed,
               nodes, scores, parents, acts, depths,
               movebuf, htab_key, htab_epoch, epoch_box, path_out):
    """Play one full game; returns (outcome, turns). State arrays hold the rest."""
    _new_game(state, deck1, deck2, cls1, cls2, ubits, seed)
    while state[G_OUTCOME] == OUTCOME_IN_PROGRESS:
        side = state[G_ACTIVE]
        wvec = wvec1 if side == 0 else wvec2
        budget = budget1 if side == 0 else budget2
        epoch_box[0] += 1
        _n, bidx = _search_turn(state, cardtab, ubits, wvec, budget,
                                nodes, scores, parents, acts, depths,
                                movebuf, htab_key, htab_epoch, epoch_box[0],
                                path_out)
        for s in range(STATE_SIZE):
            state[s] = nodes[bidx, s]
        if state[G_OUTCOME] == OUTCOME_IN_PROGRESS:
            _apply_move(state, cardtab, ubits, A_END_TURN, T_NONE, T_NONE)
    return state[G_OUTCOME], state[G_TURN]


def _play_batch(cardtab, deck_a, deck_b, cls_a, cls_b, ubit_a, ubit_b,
                wvec_a, wvec_b, budget_a, budget_b,
                seeds, a_first,
                state, nodes, scores, parents, acts, depths,
                movebuf, htab_key, htab_epoch, epoch_box, path_out,
                counts, tel_a, tel_b):
    """Play len(seeds) games between deck A and deck B.

    ``a_first[g]`` puts deck A in the player-1 seat for game g. Outputs are
    order-independent integer accumulations: ``counts`` = (A wins, B wins,
    draws, total turns); ``tel_*`` rows are per unique deck card
    (games_drawn, wins_when_drawn, games_played, wins_when_played).
    """
    ubits = np.empty((2, cardtab.shape[0]), dtype=np.int32)
    for g in range(seeds.shape[0]):
        swap = a_first[g] == 0
        for c in range(cardtab.shape[0]):
            ubits[0, c] = ubit_b[c] if swap else ubit_a[c]
            ubits[1, c] = ubit_a[c] if swap else ubit_b[c]
        if swap:
            outcome, turns = _play_game(
                state, cardtab, deck_b, deck_a, cls_b, cls_a, ubits,
                wvec_b, wvec_a, budget_b, budget_a, seeds[g],
                nodes, scores, parents, acts, depths,
                movebuf, htab_key, htab_epoch, epoch_box, path_out)
        else:
            outcome, turns = _play_game(
                state, cardtab, deck_a, deck_b, cls_a, cls_b, ubits,
                wvec_a, wvec_b, budget_a, budget_b, seeds[g],
                nodes, scores, parents, acts, depths,
                movebuf, htab_key, htab_epoch, epoch_box, path_out)
        side_a = 1 if swap else 0
        if outcome == OUTCOME_DRAW:
            counts[2] += 1
            a_won = False
            b_won = False
        else:
            a_won = (outcome == OUTCOME_P1_WIN) == (side_a == 0)
            b_won = not a_won
            if a_won:
                counts[0] += 1
            else:
                counts[1] += 1
        counts[3] += turns
        drawn_a = state[side_a * P_SIZE + P_DRAWN]
        played_a = state[side_a * P_SIZE + P_PLAYED]
        drawn_b = state[(1 - side_a) * P_SIZE + P_DRAWN]
        played_b = state[(1 - side_a) * P_SIZE + P_PLAYED]
        for u in range(tel_a.shape[0]):
            if (drawn_a >> u) & 1:
                tel_a[u, 0] += 1
                if a_won:
                    tel_a[u, 1] += 1
            if (played_a >> u) & 1:
                tel_a[u, 2] += 1
                if a_won:
                    tel_a[u, 3] += 1
        for u in range(tel_b.shape[0]):
            if (drawn_b >> u) & 1:
                tel_b[u, 0] += 1
                if b_won:
                    tel_b[u, 1] += 1
            if (played_b >> u) & 1:
                tel_b[u, 2] += 1
                if b_won:
                    tel_b[u, 3] += 1


# ---------------------------------------------------------------------------
# invariant checking and random playouts (test support)
# ---------------------------------------------------------------------------

def _check_state(state):
    """Return 0 for a well-formed state, else a violation code."""
    for side in range(2):
        b = side * P_SIZE
        if state[b + P_HP] > HERO_HP:
            return 1
        if state[b + P_MANA] < 0 or state[b + P_MANA] > state[b + P_CRYST]:
            return 2
        if state[b + P_CRYST] > MANA_CAP or state[b + P_CRYST] < 0:
            return 3
        if state[b + P_HANDN] < 0 or state[b + P_HANDN] > HAND_LIMIT:
            return 4
        if state[b + P_BOARDN] < 0 or state[b + P_BOARDN] > BOARD_LIMIT:
            return 5
        if state[b + P_FATIGUE] < 0 or state[b + P_WDUR] < 0 or state[b + P_WATK] < 0:
            return 6
        if state[b + P_DECKPOS] < 0 or state[b + P_DECKPOS] > DECK_SIZE:
            return 7
        n_real = 0
        for m in range(state[b + P_BOARDN]):
            e = b + P_BOARD + m * B_FIELDS
            if state[e + B_HP] < 1 or state[e + B_HP] > state[e + B_MAX]:
                return 8
            if state[e + B_ATK] < 0 or state[e + B_NATK] < 0:
                return 9
            if state[e + B_CARD] >= 0:
                n_real += 1
        weapon = 1 if state[b + P_WDUR] > 0 else 0
        # every card out of the deck sits in exactly one zone
        zones = (state[b + P_HANDN] + n_real + weapon
                 + state[b + P_GRAVE] + state[b + P_BURNED])
        if zones != state[b + P_DECKPOS]:
            return 10
    if state[G_OUTCOME] == OUTCOME_IN_PROGRESS:
        if state[P_HP] <= 0 or state[P_SIZE + P_HP] <= 0:
            return 11
    if state[G_TURN] > TURN_CAP:
        return 12
    return 0


def _random_playout(state, cardtab, deck1, deck2, cls1, cls2, ubits, seed,
                    movebuf, check):
    """Uniform-random legal playout; returns (violation, turns, replay hash)."""
    _new_game(state, deck1, deck2, cls1, cls2, ubits, seed)
    chain = _exact_hash(state)
    stream = _mix64(seed ^ np.uint64(0xA5A5A5A5))
    ctr = 0
    if check == 1:
        code = _check_state(state)
        if code != 0:
            return code, state[G_TURN], chain
    while state[G_OUTCOME] == OUTCOME_IN_PROGRESS:
        n = _legal_moves(state, cardtab, movebuf)
        pick = _rand_below(stream, ctr, n)
        ctr += 1
        _apply_move(state, cardtab, ubits,
                    movebuf[pick, 0], movebuf[pick, 1], movebuf[pick, 2])
        chain = _mix64(chain ^ _exact_hash(state))
        if check == 1:
            code = _check_state(state)
            if code != 0:
                return code, state[G_TURN], chain
    return 0, state[G_TURN], chain


def _random_playout_batch(cardtab, deck1, deck2, cls1, cls2, ubit1, ubit2,
                          seeds, check, state, movebuf, out):
    """Run seeded random playouts; out rows are (violation, turns, outcome),
    returns a hash chained over all replays."""
    ubits = np.empty((2, cardtab.shape[0]), dtype=np.int32)
    for c in range(cardtab.shape[0]):
        ubits[0, c] = ubit1[c]
        ubits[1, c] = ubit2[c]
    total = _FNV_OFFSET
    for g in range(seeds.shape[0]):
        code, turns, chain = _random_playout(
            state, cardtab, deck1, deck2, cls1, cls2, ubits, seeds[g],
            movebuf, check)
        out[g, 0] = code
        out[g, 1] = turns
        out[g, 2] = state[G_OUTCOME]
        total = _mix64(total ^ chain)
    return total


# ---------------------------------------------------------------------------
# compile (or pass through) in dependency order
# ---------------------------------------------------------------------------

_mix64 = kernel(_mix64)
_rand_u64 = kernel(_rand_u64)
_rand_below = kernel(_rand_below)
_hval = kernel(_hval)
_fnv = kernel(_fnv)
_exact_hash = kernel(_exact_hash)
_turn_hash = kernel(_turn_hash)
_draw_one = kernel(_draw_one)
_shuffle_deck = kernel(_shuffle_deck)
_check_outcome = kernel(_check_outcome)
_new_game = kernel(_new_game)
_sweep_dead = kernel(_sweep_dead)
_remove_hand = kernel(_remove_hand)
_mark_played = kernel(_mark_played)
_begin_turn = kernel(_begin_turn)
_apply_move = kernel(_apply_move)
_has_taunt = kernel(_has_taunt)
_legal_moves = kernel(_legal_moves)
_raw_score = kernel(_raw_score)
_eval_state = kernel(_eval_state)
_path_less = kernel(_path_less)
_search_turn = kernel(_search_turn)
_play_game = kernel(_play_game)
_play_batch = kernel(_play_batch)
_check_state = kernel(_check_state)
_random_playout = kernel(_random_playout)
_random_playout_batch = kernel(_random_playout_batch)
