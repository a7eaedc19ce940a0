// The preloaded proof-workflow example.

export const DEMO_SOURCE = `listLength :: [a] -> Nat
listLength [] = 0
listLength (y:ys) = 1 + listLength ys

listLengthProof :: xs:_ -> { _:Proof | listLength xs == len xs }
listLengthProof = _0
`;
